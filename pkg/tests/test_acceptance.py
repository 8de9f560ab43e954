"""One test per acceptance criterion, each at its pinned tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
verdict lines; the CLI `polygas validate` drives the same checks.
"""

from polygas import acceptance as ac


def _report(label, rec):
    verdict = "PASS" if rec.passed else "FAIL"
    print(
        f"{verdict} {label}: statistic={rec.statistic:.6g} bound={rec.bound:.6g} "
        f"details={rec.details} ({rec.seconds:.1f}s)"
    )
    assert rec.passed, f"{label}: statistic {rec.statistic} vs bound {rec.bound}: {rec.details}"


def test_criterion_01_geometry_identities():
    _report("criterion 1 (geometry identities)", ac.check_geometry_identities())


def test_criterion_02_parseval_confinement():
    _report("criterion 2 (Parseval confinement)", ac.check_parseval())


def test_criterion_03_elliptic_orthonormality():
    _report("criterion 3 (elliptic orthonormality)", ac.check_elliptic_orthonormality())


def test_criterion_04_bernstein_markov():
    _report("criterion 4 (Bernstein-Markov)", ac.check_bernstein_markov())


def test_criterion_05_root_finder():
    _report("criterion 5 (root-finder soundness)", ac.check_root_finder())


def test_criterion_06_law_equivalence():
    _report("criterion 6 (law equivalence)", ac.check_law_equivalence())


def test_criterion_07_real_mixture_weights():
    _report("criterion 7 (real mixture weights)", ac.check_real_mixture_weights())


def test_criterion_08_z_uniform_control():
    _report("criterion 8 (Z_{n,k} uniform control)", ac.check_z_uniform_control())


def test_criterion_09_rate_centering():
    _report("criterion 9 (rate centering + identity)", ac.check_rate_centering())


def test_criterion_10_elliptic_equilibrium():
    _report("criterion 10 (elliptic equilibrium)", ac.check_elliptic_equilibrium())


def test_criterion_11_convergence_to_equilibrium():
    _report("criterion 11 (convergence to equilibrium)", ac.check_convergence_to_equilibrium())


def test_criterion_12_symmetry_gate():
    _report("criterion 12 (real symmetry gate)", ac.check_symmetry_gate())


def test_criterion_13_chain_health():
    _report("criterion 13 (chain health)", ac.check_chain_health())
