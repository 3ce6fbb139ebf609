import math

import pytest

from fock_state import (
    DuplicateModeError,
    FockError,
    FockState,
    InvalidModeError,
    ModeRegistry,
    PhotonCapError,
    RegistryMismatchError,
    add,
    distance,
    inner_product,
    make_basis_state,
    scale,
    tensor,
    total_photon_number,
    vacuum,
)

AB = ModeRegistry(("a", "b"))


def test_registry_rejects_duplicates_and_unknown_labels():
    with pytest.raises(DuplicateModeError):
        ModeRegistry(("a", "a"))
    with pytest.raises(InvalidModeError):
        AB.index("c")
    with pytest.raises(InvalidModeError):
        AB.check_index(2)
    assert AB.resolve("b") == 1
    assert AB.extended(("c",)).labels == ("a", "b", "c")


def test_construction_validates_and_prunes():
    state = FockState(AB, {(1, 0): 0.5, (0, 1): 1e-16})
    assert len(state) == 1
    with pytest.raises(RegistryMismatchError):
        FockState(AB, {(1, 0, 0): 1.0})
    with pytest.raises(PhotonCapError):
        FockState(AB, {(9, 0): 1.0})
    with pytest.raises(FockError):
        FockState(AB, {(-1, 0): 1.0})
    with pytest.raises(FockError):
        FockState(AB, {(1, 0): complex("nan")})


def test_from_amplitudes_sums_repeated_occupations():
    state = FockState.from_labels(AB, [({"a": 1}, 0.25), ({"a": 1}, 0.25), ({"b": 2}, 1j)])
    assert state.amplitude((1, 0)) == pytest.approx(0.5)
    assert state.amplitude((0, 2)) == 1j
    assert state.amplitude((2, 2)) == 0


def test_inner_product_is_conjugate_linear_in_first_argument():
    a = FockState(AB, {(1, 0): 1.0, (0, 1): 1j})
    b = FockState(AB, {(1, 0): 2.0, (0, 1): 1.0})
    assert inner_product(a, b) == pytest.approx(2.0 - 1j)
    assert inner_product(scale(a, 1j), b) == pytest.approx(-1j * inner_product(a, b))
    assert inner_product(a, a) == pytest.approx(a.norm_squared())


def test_norm_and_normalized():
    state = FockState(AB, {(1, 0): 3.0, (0, 1): 4.0})
    assert state.norm() == pytest.approx(5.0)
    assert state.normalized().norm_squared() == pytest.approx(1.0)
    with pytest.raises(FockError):
        FockState.zero(AB).normalized()


def test_add_and_tensor_check_registries():
    a = make_basis_state(AB, (1, 0))
    other = make_basis_state(ModeRegistry(("c",)), (1,))
    with pytest.raises(RegistryMismatchError):
        add(a, other)
    product = tensor(a, other)
    assert product.registry.labels == ("a", "b", "c")
    assert product.amplitude((1, 0, 1)) == 1
    with pytest.raises(RegistryMismatchError):
        tensor(a, a)


def test_add_cancels_to_zero():
    a = make_basis_state(AB, (1, 1))
    assert add(a, scale(a, -1)).is_zero()


def test_embed_and_without_modes():
    state = FockState(AB, {(1, 0): 1.0})
    wide = state.embed(AB.extended(("anc",)))
    assert wide.amplitude((1, 0, 0)) == 1
    assert wide.without_modes(("anc",)).amplitude((1, 0)) == 1
    with pytest.raises(FockError):
        FockState(AB.extended(("anc",)), {(0, 0, 1): 1.0}).without_modes(("anc",))


def test_total_photon_number_and_distance():
    state = FockState(AB, {(1, 0): 1.0, (1, 1): 1.0})
    assert total_photon_number(state) == {1, 2}
    assert total_photon_number(vacuum(AB)) == {0}
    a = make_basis_state(AB, (1, 0))
    b = make_basis_state(AB, (0, 1))
    assert distance(a, b) == pytest.approx(math.sqrt(2))
    assert distance(a, a) == 0


ABCD = ModeRegistry(("a", "b", "c", "d"))


def sparse_state(rng, registry, terms=5, max_photons=3):
    amplitudes = {}
    for _ in range(terms):
        occ = [0] * registry.size
        for _ in range(rng.integers(0, max_photons + 1)):
            occ[rng.integers(0, registry.size)] += 1
        amplitudes[tuple(occ)] = complex(rng.normal(), rng.normal())
    return FockState.from_amplitudes(registry, amplitudes)


def test_inner_product_is_conjugate_symmetric(rng):
    for _ in range(100):
        a = sparse_state(rng, ABCD)
        b = sparse_state(rng, ABCD)
        assert inner_product(a, b) == pytest.approx(inner_product(b, a).conjugate(), abs=1e-12)


def test_tensor_adds_photon_numbers(rng):
    for _ in range(50):
        a = sparse_state(rng, AB)
        b = sparse_state(rng, ModeRegistry(("c", "d")))
        expected = {x + y for x in total_photon_number(a) for y in total_photon_number(b)}
        assert total_photon_number(tensor(a, b)) == expected
    photon_pair = tensor(make_basis_state(AB, (1, 1)), make_basis_state(ModeRegistry(("c",)), (2,)))
    assert total_photon_number(photon_pair) == {4}


def test_pruning_barely_moves_inner_products(rng):
    for _ in range(50):
        raw = sparse_state(rng, ABCD, terms=8)
        # push some amplitudes under the pruning tolerance
        tiny = {occ: (a if i % 2 else 1e-15 * a / abs(a)) for i, (occ, a) in enumerate(raw.terms.items())}
        exact = FockState(ABCD, tiny, prune_tolerance=0.0)
        pruned = FockState(ABCD, tiny)
        assert len(pruned) <= len(exact)
        other = sparse_state(rng, ABCD, terms=8)
        drift = abs(inner_product(other, pruned) - inner_product(other, exact))
        assert drift <= 1e-12 * len(exact) * max(1.0, other.norm())
