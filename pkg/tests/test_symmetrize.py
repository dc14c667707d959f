import math

import numpy as np
import pytest

from fracsym.core import symmetrize
from fracsym.core.errors import DegenerateMassError, ParameterRangeError
from fracsym.core.nonlocal_op import ProblemSpec, SolverConfig, solve_linear
from fracsym.core.rearrange import (
    GridFunction,
    boundary_radii,
    concentration_function,
    schwarz_profile,
)
from fracsym.core.specialfn import gamma_norm_const
from fracsym.core.symmetrize import (
    SymmetrizedDatum,
    build_g,
    default_tolerance,
    g_mass_curve,
    g_summability_exponent,
    h_const,
    holder_step_check,
    key_inequality_check,
    power_comparison,
    regularity_exponents,
    regularity_record,
    regularity_sweep_values,
    solve_problem,
    solve_radial_nonlinear,
    verify_theorem,
)

CFG = SolverConfig(grad_tol=1e-9)


def _abs_x(n=64):
    return GridFunction.from_callable(np.abs, -1.0, 1.0, n)


def _tent(n=64):
    return GridFunction.from_callable(lambda x: 1.0 - np.abs(x), -1.0, 1.0, n)


def _const(n=64):
    return GridFunction.from_callable(np.ones_like, -1.0, 1.0, n)


SOURCES = {"abs_x": _abs_x, "const": _const, "tent": _tent}


def test_h_const_reduces_at_p2():
    assert h_const(1, 0.5, 2.0) == pytest.approx(0.5)
    assert h_const(2, 0.3, 2.0) == pytest.approx(1 / (2 * math.pi))
    assert h_const(1, 0.5, 3.0) > 0


def test_h_const_one_dimension():
    # gamma(1,1/2,2) / 2 * (8 sqrt 2)^{1/2} / gamma(1,1/2,3)^{1/2}
    expected = (1 / (2 * math.pi)) * (8 * math.sqrt(2)) ** 0.5 / gamma_norm_const(1, 0.5, 3.0) ** 0.5
    assert h_const(1, 0.5, 3.0) == pytest.approx(expected, rel=1e-10)
    assert h_const(1, 0.5, 3.0) == pytest.approx(0.864, abs=5e-4)


@pytest.mark.parametrize("n", [256, 1024])
def test_build_g_boundary_value_of_tent(n):
    # M(r) = 2r - r^2, 指数 a = 1/4, 边界处 g(1) = H / 4
    datum = build_g(schwarz_profile(_tent(n)), 1, 0.5, 3.0)
    h = 2.0 / n
    assert abs(datum.g.values[-1] / datum.H - 0.25) <= h
    assert abs(datum.g.values[0] / datum.H - 0.25) <= h


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
def test_build_g_scales_with_source(p):
    f_sharp = schwarz_profile(_abs_x(64))
    base = build_g(f_sharp, 1, 0.5, p).g.values
    lam = 7.0
    scaled = build_g(f_sharp.with_values(lam * f_sharp.values), 1, 0.5, p).g.values
    np.testing.assert_allclose(scaled, lam ** (1 / (p - 1)) * base, rtol=1e-10)


def test_build_g_at_p2_is_rearranged_source():
    f_sharp = schwarz_profile(_abs_x())
    datum = build_g(f_sharp, 1, 0.5, 2.0)
    np.testing.assert_array_equal(datum.g.values, f_sharp.values)
    assert datum.g.values is not f_sharp.values
    assert datum.zero_mass_cells == 0


def test_build_g_rejects_bad_profiles():
    with pytest.raises(ParameterRangeError):
        build_g(GridFunction(0.0, 2.0, np.ones(8)), 1, 0.5, 3.0)
    with pytest.raises(ParameterRangeError):
        build_g(GridFunction(-1.0, 1.0, -np.ones(8)), 1, 0.5, 3.0)


def test_build_g_zero_source():
    zero = GridFunction.zeros(-1.0, 1.0, 16)
    datum = build_g(zero, 1, 0.5, 3.0)
    assert not np.any(datum.g.values)
    assert datum.zero_mass_cells == 16
    with pytest.raises(DegenerateMassError):
        build_g(zero, 1, 0.5, 3.0, strict=True)


@pytest.mark.parametrize("n", [256, 255])
def test_build_g_mass_matches_closed_form(n):
    f_sharp = schwarz_profile(_abs_x(n))
    datum = build_g(f_sharp, 1, 0.5, 3.0)
    assert np.all(datum.g.values >= 0)
    radii = boundary_radii(f_sharp)[1::16]
    discrete = concentration_function(datum.g, radii).masses
    closed = g_mass_curve(f_sharp, 1, 0.5, 3.0, radii)
    np.testing.assert_allclose(discrete, closed, rtol=1e-2)


def test_default_tolerance():
    one = GridFunction.from_callable(np.ones_like, -1.0, 1.0, 64)
    assert default_tolerance(one, 0.5, 3.0) == pytest.approx(math.sqrt(2) / 32)
    assert default_tolerance(one, 0.25, 2.0, scale=2.0) == pytest.approx(2 * 2 * (1 / 32) ** 0.5)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_verify_theorem_passes(p):
    spec = ProblemSpec(s=0.5, p=p, f=_abs_x())
    report = verify_theorem(spec, CFG, 64)
    assert report.passed, f"worst={report.worst_violation}, tol={report.tolerance_used}"
    assert set(report.profiles) == {"f", "u", "u_sharp", "f_sharp", "g", "v"}
    assert {"u", "v", "zero_mass_cells", "H", "perimeter"} <= set(report.solver_diagnostics)
    assert report.conc_u_sharp[0] == 0.0
    assert report.slack.shape == report.radii.shape


@pytest.mark.slow
@pytest.mark.parametrize("source", sorted(SOURCES))
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_verify_theorem_matrix(source, s, p):
    spec = ProblemSpec(s=s, p=p, f=SOURCES[source](128))
    assert verify_theorem(spec, SolverConfig(), 128).passed


@pytest.mark.slow
def test_verify_theorem_under_refinement():
    excess = []
    for n in [64, 128, 256, 512]:
        report = verify_theorem(ProblemSpec(s=0.5, p=3.0, f=_tent(n)), CFG, n)
        assert report.passed
        excess.append((max(report.worst_violation, 0.0), report.tolerance_used))
    for (coarse, _), (fine, tol) in zip(excess, excess[1:]):
        assert fine <= coarse + 0.1 * tol


def test_verify_theorem_detects_flipped_datum(monkeypatch):
    original = symmetrize.build_g

    def flipped(*args, **kwargs):
        datum = original(*args, **kwargs)
        return SymmetrizedDatum(
            datum.g.with_values(-datum.g.values), datum.H, datum.perimeter, datum.zero_mass_cells
        )

    monkeypatch.setattr(symmetrize, "build_g", flipped)
    report = verify_theorem(ProblemSpec(s=0.5, p=2.0, f=_abs_x()), CFG, 64)
    assert not report.passed
    assert report.worst_violation > report.tolerance_used


def test_verify_theorem_rejects_higher_dimension():
    with pytest.raises(ParameterRangeError):
        verify_theorem(ProblemSpec(s=0.25, p=2.0, f=_abs_x(), N=2), CFG, 64)


def test_key_inequality_is_equality_for_radial_linear_problem():
    spec = ProblemSpec(s=0.5, p=2.0, f=_tent())
    u = solve_linear(spec, 64)
    profile = key_inequality_check(u, spec.f, spec)
    np.testing.assert_allclose(profile.lhs, profile.rhs, rtol=1e-8, atol=1e-10)


def test_key_inequality_snaps_radii():
    spec = ProblemSpec(s=0.5, p=2.0, f=_tent())
    u = solve_linear(spec, 64)
    profile = key_inequality_check(u, spec.f, spec, radii=[0.51, 0.75])
    np.testing.assert_allclose(profile.radii, [0.5, 0.75])


@pytest.mark.slow
@pytest.mark.parametrize("source", sorted(SOURCES))
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_key_inequality_matrix(source, s, p):
    spec = ProblemSpec(s=s, p=p, f=SOURCES[source](256))
    u = solve_problem(spec, SolverConfig(), 256).u
    profile = key_inequality_check(u, spec.f, spec)
    assert profile.min_slack >= -u.h


def test_holder_step_holds():
    spec = ProblemSpec(s=0.5, p=3.0, f=_abs_x())
    u = solve_problem(spec, CFG, 64).u
    profile = holder_step_check(u, spec)
    assert profile.min_slack >= -1e-9 * max(float(np.abs(profile.rhs).max()), 1.0)


def test_power_comparison_of_profile_with_itself():
    u = solve_linear(ProblemSpec(s=0.5, p=2.0, f=_tent()), 64)
    report = power_comparison(u, schwarz_profile(u), 3.0)
    assert report.passed
    assert report.tolerance_used == pytest.approx(u.h)


def test_radial_nonlinear_solution_is_symmetric():
    spec = ProblemSpec(s=0.5, p=3.0, f=_abs_x())
    v = solve_radial_nonlinear(spec, CFG, 64).u
    assert v.is_symmetric
    np.testing.assert_allclose(v.values, v.values[::-1], rtol=1e-6)


def test_regularity_exponents():
    assert regularity_exponents(1, 0.25, 3.0, 1.5) == (math.inf, None, "linf")
    q, index, branch = regularity_exponents(1, 0.25, 3.0, 1.2)
    assert branch == "lorentz"
    assert q == pytest.approx(24.0)
    assert index == pytest.approx(1.2 / 1.3)


@pytest.mark.parametrize(
    "N,s,p,m",
    [(1, 0.5, 3.0, 2.0), (1, 0.25, 3.0, 4.0 / 3.0), (1, 0.25, 3.0, 1.0)],
)
def test_regularity_exponents_rejects(N, s, p, m):
    with pytest.raises(ParameterRangeError):
        regularity_exponents(N, s, p, m)


def test_regularity_sweep_values():
    values = regularity_sweep_values(1, 0.25, 3.0)
    lo, hi = 3.0 / 2.75, 4.0 / 3.0
    assert values == pytest.approx([lo, lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3])
    for m in values:
        assert regularity_exponents(1, 0.25, 3.0, m)[2] == "lorentz"
    with pytest.raises(ParameterRangeError):
        regularity_sweep_values(1, 0.5, 2.0)


def test_g_summability_exponent():
    assert g_summability_exponent(1, 0.5, 2.0, 3.0) == 3.0
    assert g_summability_exponent(1, 0.25, 3.0, 2.0) == pytest.approx(4.0 / 1.5)
    assert g_summability_exponent(1, 0.5, 3.0, 2.0) == pytest.approx(7.0 / 6.0)
    with pytest.raises(ParameterRangeError):
        g_summability_exponent(1, 0.4, 3.0, 2.0)


@pytest.mark.parametrize("m", [1.2, 1.5])
def test_regularity_ratio_is_scale_invariant(m):
    f = _abs_x(32)
    spec = ProblemSpec(s=0.25, p=3.0, f=f, m=m)
    base = regularity_record(spec, CFG, 32)
    scaled = regularity_record(spec.with_source(f.with_values(8.0 * f.values)), CFG, 32)
    assert base.ratio > 0
    assert scaled.ratio == pytest.approx(base.ratio, rel=1e-6)
    assert scaled.u_norm == pytest.approx(2 * math.sqrt(2) * base.u_norm, rel=1e-6)
