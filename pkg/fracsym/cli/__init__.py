from fracsym.core.config.default import VERSION

__version__ = VERSION
