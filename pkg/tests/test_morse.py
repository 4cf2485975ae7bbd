import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torsionlab import morse
from torsionlab.complex_core import euler_characteristic, torsion, torsion_via_bases
from torsionlab.morse import MorseError


def standard_matching(cc):
    """Pair vertex j with edge j-1 for j = 1..N-1, leaving v0 and the wrap edge."""
    N = cc.cells[0]
    return morse.make_morse_data(cc, [((0, j), (1, j - 1)) for j in range(1, N)])


@pytest.mark.parametrize("N", [1, 2, 3, 8])
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.77])
def test_circle_torsion_subdivision_invariant(N, alpha):
    c = morse.circle_complex(N, alpha, rank=2)
    expect = -math.log(abs(1 - np.exp(2j * math.pi * alpha)))
    assert torsion(c).log_rho == pytest.approx(expect, abs=1e-9)
    assert torsion_via_bases(c) == pytest.approx(expect, abs=1e-9)


def test_circle_N1_is_rotation_minus_identity():
    c = morse.circle_complex(1, 0.2, rank=2)
    th = 2 * math.pi * 0.2
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    assert np.allclose(np.abs(c.d[0]), np.abs(R - np.eye(2)))
    assert abs(np.linalg.det(c.d[0])) == pytest.approx(abs(1 - np.exp(1j * th)) ** 2)


def test_circle_acyclicity():
    assert morse.is_acyclic_complex(morse.circle_complex(2, 0.5, rank=1))
    assert morse.betti_numbers(morse.circle_complex(2, 0.5, rank=2)) == [0, 0]
    assert not morse.is_acyclic_complex(morse.circle_complex(4, 0.0, rank=1))
    assert morse.betti_numbers(morse.circle_complex(3, 0.0, rank=1)) == [1, 1]


def test_circle4_morse_complex():
    cc = morse.circle_cell_complex(4, 0.5, rank=2)
    dm = standard_matching(cc)
    mc = morse.morse_complex(cc, dm)
    assert mc.dims == [2, 2]
    cmp_ = morse.milnor_vs_full_torsion(cc, dm)
    assert cmp_.acyclic
    assert cmp_.difference <= 1e-9
    assert cmp_.log_rho_morse == pytest.approx(-math.log(2), abs=1e-9)


def test_empty_matching_is_identity():
    cc = morse.circle_cell_complex(5, 0.3, rank=2)
    dm = morse.empty_matching(cc)
    mc = morse.morse_complex(cc, dm)
    full = morse.cochain_complex(cc)
    assert mc.dims == full.dims
    for a, b in zip(mc.d, full.d):
        np.testing.assert_array_equal(a, b)
    assert morse.milnor_vs_full_torsion(cc, dm).difference == 0.0


def test_cyclic_matching_rejected_with_witness():
    cc = morse.circle_cell_complex(3, 0.0, rank=1)
    pairs = [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))]
    with pytest.raises(MorseError, match="V-path"):
        morse.make_morse_data(cc, pairs)
    assert morse.find_v_cycle(cc, pairs) is not None


def test_invalid_pairs_rejected():
    cc = morse.circle_cell_complex(4, 0.0, rank=1)
    with pytest.raises(MorseError):
        morse.make_morse_data(cc, [((0, 0), (1, 2))])
    with pytest.raises(MorseError):
        morse.make_morse_data(cc, [((0, 0), (1, 0)), ((0, 0), (1, 3))])


def random_cases():
    yield morse.circle_cell_complex(6, 0.3, rank=2)
    yield morse.circle_cell_complex(5, 0.5, rank=1)
    A = morse.circle_cell_complex(3, 0.0, rank=1)
    B = morse.circle_cell_complex(4, 0.5, rank=1)
    yield morse.product_cell_complex(A, B)


@pytest.mark.parametrize("cc", list(random_cases()), ids=["circle6", "mobius5", "torus3x4"])
def test_matching_independence_and_invariants(cc):
    rng = np.random.default_rng(7)
    full = morse.cochain_complex(cc)
    betti = morse.betti_numbers(full)
    chi = euler_characteristic(full)
    vals = []
    for _ in range(6):
        dm = morse.random_acyclic_matching(cc, rng)
        mc = morse.morse_complex(cc, dm)
        assert morse.betti_numbers(mc) == betti
        assert euler_characteristic(mc) == chi
        vals.append(torsion(mc).log_rho)
    assert max(vals) - min(vals) <= 1e-9
    if all(b == 0 for b in betti):
        assert abs(vals[0] - torsion(full).log_rho) <= 1e-8


@given(st.integers(0, 2 ** 31), st.integers(2, 9), st.sampled_from([0.25, 0.5, 0.6]))
def test_random_matchings_on_circles(seed, N, alpha):
    cc = morse.circle_cell_complex(N, alpha, rank=2 if alpha != 0.5 else 1)
    dm = morse.random_acyclic_matching(cc, np.random.default_rng(seed))
    assert morse.milnor_vs_full_torsion(cc, dm).difference <= 1e-9


def test_torus_product_preserves_chi_and_betti():
    A = morse.circle_cell_complex(3, 0.0, rank=1)
    P = morse.product_cell_complex(A, A)
    dA = standard_matching(A)
    dm = morse.product_matching(P, dA, dA)
    mc = morse.morse_complex(P, dm)
    assert euler_characteristic(mc) == 0
    assert morse.betti_numbers(mc) == [1, 2, 1]
    assert mc.dims == [1, 2, 1]


def test_integer_boundary_squares_to_zero():
    A = morse.circle_cell_complex(3, 0.0, rank=1)
    P = morse.product_cell_complex(A, A)
    assert not np.any(P.boundary(1) @ P.boundary(2))
    c = morse.cochain_complex(morse.product_cell_complex(A, morse.circle_cell_complex(4, 0.3)))
    assert max(np.abs(c.d[1] @ c.d[0]).max(), 0.0) <= 1e-12


def test_critical_structure_examples():
    cc = morse.circle_cell_complex(8, 0.0, rank=1)
    f = morse.circle_f_values(8, np.cos)
    dm = morse.graph_gradient_matching(cc, f[0])
    assert morse.critical_point_structure_match(dm, dm, f, f)
    shifted = [list(f[0]), list(f[1])]
    k, i = dm.critical_cells[0]
    shifted[k][i] += 0.5
    assert not morse.critical_point_structure_match(dm, dm, f, shifted)
    with pytest.raises(MorseError):
        morse.critical_point_structure_match(dm, dm, None, f)


def test_cosine_circles_on_two_grids_share_structure():
    out = []
    for N in (8, 64):
        cc = morse.circle_cell_complex(N, 0.0, rank=1)
        f = morse.circle_f_values(N, np.cos)
        dm = morse.graph_gradient_matching(cc, f[0])
        out.append((dm, f))
    (dA, fA), (dB, fB) = out
    assert morse.critical_structure(dA, fA) == [(0, -1.0), (1, 1.0)]
    assert morse.critical_point_structure_match(dA, dB, fA, fB)


def test_json_roundtrip():
    cc = morse.circle_cell_complex(4, 0.5, rank=1)
    dm = standard_matching(cc)
    obj = morse.cell_complex_to_dict(cc, dm)
    cc2, dm2 = morse.cell_complex_from_dict(obj)
    assert dm2.critical_cells == dm.critical_cells
    np.testing.assert_array_equal(morse.cochain_complex(cc2).d[0], morse.cochain_complex(cc).d[0])


def test_json_requires_twist_for_generic_holonomy():
    with pytest.raises(MorseError, match="twist"):
        morse.cell_complex_from_dict({"cells": [1, 1], "boundary": [[[0]]], "holonomy": 0.3})
    with pytest.raises(MorseError):
        morse.cell_complex_from_dict({"cells": [1, 1]})
