import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_spp import (
    CapacityError,
    SppInstance,
    ValidationError,
    brute_force_min_residue,
    build_cost_spectrum,
    enumerate_residues,
    generate_instance,
    residue,
)
from adiabatic_spp.spp_core import _exact_band

instances = st.builds(
    lambda n, b, seed: generate_instance(n, b, seed),
    st.integers(1, 10),
    st.integers(1, 30),
    st.integers(0, 2**32 - 1),
)


def exact_cost(mag: int, inst: SppInstance, K) -> int:
    """Band of |Omega| by rational comparison, written out from the band definition."""
    ratio2 = Fraction(mag * mag, 4**inst.b) / (inst.n * Fraction(K) ** 2 * Fraction(1, 4**inst.n))
    if ratio2 < 1:
        return 0
    k = 1
    while not (Fraction(4) ** (k - 1) <= ratio2 < Fraction(4) ** k):
        k += 1
    return k


def test_generate_large_precision_sizes():
    inst = generate_instance(15, 25, 7)
    assert inst.n == 15 and len(inst.alphas) == 15
    assert all(1 <= a <= 2**25 for a in inst.alphas)


def test_generate_smallest_domain():
    seen = {generate_instance(1, 1, s).alphas for s in range(50)}
    assert seen <= {(1,), (2,)}
    assert seen == {(1,), (2,)}


def test_generate_deterministic():
    assert generate_instance(9, 20, 3) == generate_instance(9, 20, 3)
    assert generate_instance(9, 20, 3) != generate_instance(9, 20, 4)


@pytest.mark.parametrize("n,b", [(0, 5), (31, 5), (3, 0), (3, 63), (4, 60), (1, 62)])
def test_generate_rejects_bad_sizes(n, b):
    with pytest.raises(ValidationError):
        generate_instance(n, b, 0)


def test_instance_validates_alphas():
    with pytest.raises(ValidationError):
        SppInstance(2, 3, (1, 9))
    with pytest.raises(ValidationError):
        SppInstance(2, 3, (0, 1))
    with pytest.raises(ValidationError):
        SppInstance(3, 3, (1, 2))


def test_instance_json_roundtrip(tmp_path):
    inst = generate_instance(5, 25, 11)
    inst.save(tmp_path / "i.json")
    assert SppInstance.load(tmp_path / "i.json") == inst
    with pytest.raises(ValidationError):
        SppInstance.from_dict({"n": 2})


def test_residue_examples():
    inst = SppInstance(2, 3, (3, 5))
    assert residue(inst, [0, 0]) == 8
    # bit strings written z_0 z_1: "01" puts a_1 on the negative side
    assert residue(inst, [0, 1]) == -2
    assert residue(inst, 0b10) == -2  # same bitstring as an index (bit j = z_j)
    with pytest.raises(ValidationError):
        residue(inst, [0, 2])
    with pytest.raises(ValidationError):
        residue(inst, 4)


@given(instances, st.data())
def test_residue_complement_antisymmetric(inst, data):
    z = data.draw(st.integers(0, 2**inst.n - 1))
    assert residue(inst, z ^ (2**inst.n - 1)) == -residue(inst, z)
    assert residue(inst, 0) == sum(inst.alphas)


def test_enumerate_small_example():
    table = enumerate_residues(SppInstance(2, 3, (3, 5)))
    # listed in string order z_0 z_1 = 00, 01, 10, 11 -> indices 0, 2, 1, 3
    assert table.residues[[0, 2, 1, 3]].tolist() == [8, -2, 2, -8]
    assert table.residues.tolist() == [8, 2, -2, -8]


@settings(max_examples=30)
@given(instances)
def test_enumerate_matches_pointwise(inst):
    table = enumerate_residues(inst)
    assert [residue(inst, z) for z in range(2**inst.n)] == table.residues.tolist()
    assert sorted(table.residues.tolist()) == sorted((-table.residues).tolist())
    mag = np.abs(table.residues)
    assert mag[table.sorted_order[0]] == mag.min()
    assert np.all(np.diff(mag[table.sorted_order]) >= 0)
    assert mag.max() <= inst.total


def test_sorted_order_ties_by_index():
    table = enumerate_residues(SppInstance(3, 2, (1, 1, 2)))
    mag = np.abs(table.residues)
    for i in range(7):
        a, b = table.sorted_order[i], table.sorted_order[i + 1]
        if mag[a] == mag[b]:
            assert a < b


def test_enumerate_capacity():
    inst = SppInstance(27, 20, tuple(range(1, 28)))
    with pytest.raises(CapacityError):
        enumerate_residues(inst)


@settings(max_examples=40)
@given(instances, st.data())
def test_mattis_identity(inst, data):
    z = data.draw(st.integers(0, 2**inst.n - 1))
    s = [1 - 2 * ((z >> j) & 1) for j in range(inst.n)]
    quad = sum(a * b * si * sj for a, si in zip(inst.alphas, s) for b, sj in zip(inst.alphas, s))
    assert residue(inst, z) ** 2 == quad


def test_band_definition_with_exact_edges():
    # n=4, b=4, K=1: delta = 2 * 2**-4, i.e. 2 residue units, so edges are integers
    inst = SppInstance(4, 4, (1, 1, 2, 2))
    table = enumerate_residues(inst)
    costs = build_cost_spectrum(inst, table, 1)
    by_mag = {int(abs(r)): int(c) for r, c in zip(table.residues, costs.costs)}
    assert by_mag == {0: 0, 2: 1, 4: 2, 6: 2}  # |Omega|/delta = 0, 1, 2, 3
    assert costs.L == 2  # A/delta = 3
    assert math.isclose(costs.delta, 0.125)


@pytest.mark.filterwarnings("ignore:delta=")
@settings(max_examples=40, deadline=None)
@given(instances, st.sampled_from([1, 3, 7.5, 20, 33]))
def test_bands_match_rational_oracle(inst, K):
    table = enumerate_residues(inst)
    costs = build_cost_spectrum(inst, table, K)
    expected = [exact_cost(abs(int(r)), inst, K) for r in table.residues]
    assert costs.costs.tolist() == expected
    assert costs.L == exact_cost(inst.total, inst, K)


def test_exact_band_boundaries():
    d2 = Fraction(4)  # delta = 2 units
    assert [_exact_band(x, d2) for x in (0, 1, 2, 3, 4, 7, 8)] == [0, 0, 1, 1, 2, 2, 3]


@pytest.mark.parametrize("seed", range(5))
def test_cost_spectrum_invariants(seed):
    inst = generate_instance(12, 25, seed)
    table = enumerate_residues(inst)
    costs = build_cost_spectrum(inst, table, 20)
    N = 2**12
    assert costs.degeneracies.sum() == N
    assert costs.d0 >= 2 and costs.d0 % 2 == 0
    assert costs.costs.min() == 0 and costs.costs.max() == costs.L
    assert 2 ** (costs.L - 1) <= costs.A / costs.delta < 2**costs.L
    z = np.arange(N)
    assert np.array_equal(costs.costs, costs.costs[z ^ (N - 1)])
    mag = np.abs(table.residues)[table.sorted_order]
    assert np.all(np.diff(costs.costs[table.sorted_order]) >= 0)
    assert np.all(np.diff(mag) >= 0)


def test_degeneracy_growth_roughly_doubles():
    for seed in range(3):
        inst = generate_instance(14, 25, seed)
        costs = build_cost_spectrum(inst, enumerate_residues(inst), 20)
        d = costs.degeneracies.astype(float)
        ratios = d[3 : costs.L - 3] / d[2 : costs.L - 4]
        assert 1.5 <= np.median(ratios) <= 2.6


def test_degenerate_spectrum_warns():
    inst = generate_instance(4, 25, 0)
    with pytest.warns(RuntimeWarning):
        costs = build_cost_spectrum(inst, enumerate_residues(inst), 100)
    assert costs.L == 0 and costs.d0 == 16


def test_cost_rejects_bad_K():
    inst = generate_instance(4, 25, 0)
    with pytest.raises(ValidationError):
        build_cost_spectrum(inst, enumerate_residues(inst), 0)


def test_degeneracy_csv(tmp_path):
    inst = generate_instance(8, 25, 0)
    costs = build_cost_spectrum(inst, enumerate_residues(inst), 20)
    costs.write_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "k,d_k"
    assert sum(int(l.split(",")[1]) for l in lines[1:]) == 256


def test_brute_force_examples():
    best, zs = brute_force_min_residue(SppInstance(3, 4, (3, 5, 8)))
    assert best == 0
    assert 0b100 in zs and 0b011 in zs  # signs (+,+,-) and its complement
    assert brute_force_min_residue(SppInstance(2, 1, (1, 1)))[0] == 0
    assert brute_force_min_residue(SppInstance(1, 5, (32,))) == (32, [0, 1])


@settings(max_examples=25)
@given(instances)
def test_brute_force_against_itertools(inst):
    import itertools

    best = min(abs(sum(s * a for s, a in zip(signs, inst.alphas)))
               for signs in itertools.product((1, -1), repeat=inst.n))
    got, zs = brute_force_min_residue(inst)
    assert got == best
    full = 2**inst.n - 1
    assert all((z ^ full) in zs for z in zs)


def test_empty_ground_level_is_flagged():
    # +-1 +-2 +-4 +-8 is always odd, so |Omega| >= 2**-3 > delta
    inst = SppInstance(4, 3, (1, 2, 4, 8))
    table = enumerate_residues(inst)
    with pytest.warns(RuntimeWarning, match="ground level is empty"):
        costs = build_cost_spectrum(inst, table, 0.1)
    assert costs.d0 == 0 and costs.degeneracies.sum() == 16
