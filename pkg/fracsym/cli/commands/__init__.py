from .cmd_verify import verify
from .cmd_figure1 import figure1
from .cmd_regularity import regularity
from .cmd_specialfn_check import specialfn_check
from .cmd_conf import conf

__all__ = ["verify", "figure1", "regularity", "specialfn_check", "conf"]
