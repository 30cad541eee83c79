import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from boxworld.exactlp import exact_rank, solve_equality_feasibility, solve_linear_system


def test_feasible_simple():
    # x + y = 1, x - y = 0 -> x = y = 1/2
    res = solve_equality_feasibility([[1, 1], [1, -1]], [1, 0])
    assert res.feasible
    assert res.solution == [Fraction(1, 2), Fraction(1, 2)]


def test_infeasible_sign():
    # x + y = -1 with x, y >= 0
    res = solve_equality_feasibility([[1, 1]], [-1])
    assert not res.feasible
    assert res.farkas is not None


def test_infeasible_inconsistent():
    res = solve_equality_feasibility([[1, 1], [1, 1]], [1, 2])
    assert not res.feasible


def test_rational_coefficients():
    res = solve_equality_feasibility(
        [[Fraction(1, 3), Fraction(2, 3)], [1, 0]], [Fraction(1, 2), Fraction(1, 4)]
    )
    assert res.feasible
    x, y = res.solution
    assert Fraction(1, 3) * x + Fraction(2, 3) * y == Fraction(1, 2)
    assert x == Fraction(1, 4)


def test_redundant_rows():
    res = solve_equality_feasibility([[1, 1], [2, 2]], [1, 2])
    assert res.feasible
    assert sum(res.solution) == 1


def test_fuzz_against_scipy():
    rng = random.Random(123)
    agree = 0
    for trial in range(60):
        m = rng.randint(1, 5)
        n = rng.randint(1, 7)
        A = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(m)]
        b = [rng.randint(-4, 4) for _ in range(m)]
        res = solve_equality_feasibility(A, b)
        ref = linprog(
            c=[0.0] * n,
            A_eq=np.array(A, dtype=float),
            b_eq=np.array(b, dtype=float),
            bounds=(0, None),
            method="highs",
        )
        # scipy status 0 = optimal (feasible), 2 = infeasible
        assert ref.status in (0, 2)
        assert res.feasible == (ref.status == 0), (A, b)
        agree += 1
    assert agree == 60


def test_exact_rank_matches_numpy():
    rng = random.Random(5)
    for _ in range(40):
        m = rng.randint(1, 6)
        n = rng.randint(1, 6)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        assert exact_rank(M) == np.linalg.matrix_rank(np.array(M, dtype=float))


def test_exact_rank_fractions():
    assert exact_rank([[Fraction(1, 2), 1], [Fraction(1, 4), Fraction(1, 2)]]) == 1


def test_solve_linear_system():
    sol = solve_linear_system([[2, 0], [0, 4]], [1, 1])
    assert sol == [Fraction(1, 2), Fraction(1, 4)]
    assert solve_linear_system([[1, 1], [1, 1]], [0, 1]) is None


def test_big_degenerate_instance():
    # identity-like system with many redundant equalities
    n = 30
    A = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    A += [[1] * n]
    b = [Fraction(1, n)] * n + [1]
    res = solve_equality_feasibility(A, b)
    assert res.feasible
    assert sum(res.solution) == 1
