import math

import numpy as np
import pytest

from bellent.bell import (
    Behavior,
    BellInequality,
    InequalitySet,
    MeasurementSettings,
    behavior_from_state,
    bundled_inequality,
    chsh,
    chsh_horodecki,
    correlation_matrix,
    default_set,
    evaluate,
    expand_relabelings,
    load_inequality_dir,
    load_inequality_file,
    load_orbit_cache,
    max_violation,
    mermin,
    parse_inequality,
    pauli_tensor,
    relabel_behavior,
    serialize_inequality,
    svetlichny,
    write_orbit_cache,
)
from bellent.errors import MissingDataError, ParameterError, ParseError
from bellent.qstate import gghz, werner_like

SQRT2 = math.sqrt(2.0)

# Bloch settings reaching the Tsirelson bound: a0=z, a1=x, b pair diagonal.
CHSH_OPT = np.array([
    [[0, 0, 1.0], [1.0, 0, 0]],
    [[1 / SQRT2, 0, 1 / SQRT2], [-1 / SQRT2, 0, 1 / SQRT2]],
])

# Equatorial phases hitting the Svetlichny maximum sqrt(2) on GHZ.
def _equatorial(phis):
    return np.array([[[math.cos(p), math.sin(p), 0.0] for p in pair] for pair in phis])

SVET_OPT = _equatorial([(0, np.pi / 2), (0, np.pi / 2), (np.pi / 4, 3 * np.pi / 4)])


def test_inequality_families_structure():
    c, m, s = chsh(), mermin(), svetlichny()
    assert c.lhv_bound == 2.0 and m.lhv_bound == 2.0 and s.lhv_bound == 4.0
    assert np.count_nonzero(c.coefficients) == 16
    assert np.count_nonzero(m.coefficients) == 32
    assert np.count_nonzero(s.coefficients) == 64


def test_tsirelson_bound_reached():
    b = behavior_from_state(gghz(np.pi / 4, 2).projector(),
                            MeasurementSettings(2, CHSH_OPT))
    b.validate()
    assert abs(evaluate(chsh(), b) - SQRT2) < 1e-12


def test_svetlichny_maximum_on_ghz():
    b = behavior_from_state(gghz(np.pi / 4, 3).projector(),
                            MeasurementSettings(3, SVET_OPT))
    b.validate()
    assert abs(evaluate(svetlichny(), b) - SQRT2) < 1e-12
    assert abs(max_violation(b, default_set(3)) - SQRT2) < 1e-12


def test_evaluate_is_linear_in_the_behavior():
    rng = np.random.default_rng(13)
    dirs = rng.normal(size=(2, 2, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    ms = MeasurementSettings(2, dirs)
    b1 = behavior_from_state(werner_like(0.6, 0.9, 2), ms)
    b2 = behavior_from_state(werner_like(0.3, 0.5, 2), ms)
    for lam in (0.0, 0.25, 0.7, 1.0):
        mix = Behavior(2, lam * b1.table + (1 - lam) * b2.table)
        want = lam * evaluate(chsh(), b1) + (1 - lam) * evaluate(chsh(), b2)
        assert abs(evaluate(chsh(), mix) - want) < 1e-12


def test_orbit_sizes_and_digests():
    """Relabeling orbits are closed and have the frozen sizes."""
    set2 = expand_relabelings([chsh()])
    set3m = expand_relabelings([mermin()])
    set3s = expand_relabelings([svetlichny()])
    assert len(set2.inequalities) == 8
    assert len(set3m.inequalities) == 16
    assert len(set3s.inequalities) == 16
    assert set2.digest().startswith("df2aac18d1e4")
    assert set3m.digest().startswith("529e19246699")
    assert set3s.digest().startswith("6535e8ed7934")


def test_orbit_closure_under_relabeling():
    """max over the orbit is invariant when the behavior itself is relabeled."""
    iset = default_set(2)
    rng = np.random.default_rng(21)
    dirs = rng.normal(size=(2, 2, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    b = behavior_from_state(werner_like(0.7, 0.95, 2), MeasurementSettings(2, dirs))
    base = max_violation(b, iset)
    for perm in ([0, 1], [1, 0]):
        for inswap in ([0, 0], [1, 0], [0, 1], [1, 1]):
            rb = relabel_behavior(b, perm, inswap, [[0, 1], [1, 0]])
            rb.validate()
            assert abs(max_violation(rb, iset) - base) < 1e-12


def test_behavior_signaling_detected():
    t = np.full((2, 2, 2, 2), 0.25)
    # at a-input 1 Alice's marginal depends on Bob's input: 0.6/0.4 vs 0.5/0.5
    t[1, 0] = [[0.3, 0.3], [0.2, 0.2]]
    b = Behavior(2, t)
    with pytest.raises(ParameterError, match="signaling"):
        b.validate()


def test_correlator_sign_convention():
    b = behavior_from_state(gghz(np.pi / 4, 2).projector(),
                            MeasurementSettings(2, CHSH_OPT))
    # a0 = z against b0 = (x+z)/sqrt2: E = 1/sqrt2
    assert abs(b.correlator((0, 0)) - 1 / SQRT2) < 1e-12
    assert abs(b.correlator((1, 1)) + 1 / SQRT2) < 1e-12


def test_correlation_matrix_and_horodecki():
    rho = werner_like(np.pi / 4, 0.9, 2)
    r = correlation_matrix(rho)
    lam = pauli_tensor(rho)
    np.testing.assert_allclose(r, lam[1:, 1:], atol=1e-15)
    got = chsh_horodecki(r, *CHSH_OPT[0], *CHSH_OPT[1])
    assert abs(got - 0.9 * SQRT2) < 1e-12
    # Horodecki criterion: the optimum equals sqrt of the two largest
    # eigenvalues of R^T R, and no setting choice can beat it
    s = np.sort(np.linalg.eigvalsh(r.T @ r))
    bound = math.sqrt(s[-1] + s[-2])
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = rng.normal(size=(4, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        assert chsh_horodecki(r, d[0], d[1], d[2], d[3]) <= bound + 1e-12


def test_serialize_parse_round_trip():
    for ineq in (chsh(), mermin(), svetlichny()):
        text = serialize_inequality(ineq)
        back = parse_inequality(text, name=ineq.name)
        assert back.n_parties == ineq.n_parties
        assert back.lhv_bound == ineq.lhv_bound
        np.testing.assert_array_equal(back.coefficients, ineq.coefficients)


def test_parse_reports_line_numbers():
    good = serialize_inequality(chsh())
    lines = good.splitlines()
    bad = "\n".join(lines[:3] + lines[4:])  # drop the outputs header line
    with pytest.raises(ParseError) as exc:
        parse_inequality(bad)
    assert exc.value.line is not None
    dup = good + lines[-1] + "\n"
    with pytest.raises(ParseError, match="duplicate"):
        parse_inequality(dup)
    with pytest.raises(ParseError):
        parse_inequality(good.replace("bellineq 1", "bellineq 9"))


def test_bundled_inequalities_load():
    for name, bound in (("chsh", 2.0), ("mermin", 2.0), ("svetlichny", 4.0)):
        ineq = bundled_inequality(name)
        assert ineq.lhv_bound == bound
    with pytest.raises(MissingDataError):
        bundled_inequality("nosuch")


def test_default_sets():
    s2 = default_set(2)
    s3 = default_set(3)
    assert s2.tag == "chsh" and len(s2.inequalities) == 8
    assert s3.tag == "svetlichny:lower-bound" and len(s3.inequalities) == 16
    with pytest.raises(ParameterError):
        default_set(4)


def test_inequality_file_and_dir_loading(tmp_path):
    p = tmp_path / "my.bellineq"
    p.write_text(serialize_inequality(chsh()))
    ineq = load_inequality_file(p)
    assert ineq.n_parties == 2
    iset = load_inequality_dir(tmp_path)
    assert len(iset.inequalities) == 8  # expanded orbit
    raw = load_inequality_dir(tmp_path, expand=False)
    assert len(raw) == 1 and raw[0].n_parties == 2
    with pytest.raises(MissingDataError):
        load_inequality_dir(tmp_path / "empty_nowhere")


def test_orbit_cache_round_trip(tmp_path):
    iset = default_set(3)
    write_orbit_cache(iset, tmp_path / "cache")
    back = load_orbit_cache(tmp_path / "cache")
    assert back.digest() == iset.digest()
    assert back.tag == iset.tag
    # corrupt one member file and the digest check must trip
    victim = sorted((tmp_path / "cache").glob("*.bellineq"))[0]
    victim.write_text(serialize_inequality(mermin()))
    with pytest.raises(ParseError):
        load_orbit_cache(tmp_path / "cache")


def test_dedup_collapses_equivalent_members():
    # the same inequality twice expands to the same 8-member orbit
    iset = expand_relabelings([chsh(), chsh()])
    assert len(iset.inequalities) == 8


def test_settings_validation():
    with pytest.raises(ParameterError):
        MeasurementSettings(2, np.ones((2, 2, 3)))
    bad = CHSH_OPT.copy()
    bad[0, 0] *= 1.001
    with pytest.raises(ParameterError):
        MeasurementSettings(2, bad)


def test_inequality_validation():
    with pytest.raises(ParameterError):
        BellInequality(2, np.zeros((2, 2, 2, 2)), 2.0)
    with pytest.raises(ParameterError):
        BellInequality(2, chsh().coefficients, 0.0)
