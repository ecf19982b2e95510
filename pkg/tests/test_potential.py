"""Expression parser and evaluator.

The corpus tables below are imported by the acceptance suite, so keep them
flat tuples: (source, point, expected) for values, (source, offset) for
syntax errors, (source, point) for evaluation errors.
"""
import math

import numpy as np
import pytest

from fisherhydro.grid import Grid
from fisherhydro.potential import (
    EvalError,
    ParseError,
    eval_on_grid,
    eval_potential,
    parse_potential,
    print_expr,
)

EVAL_CASES = [
    ("0", 0.0, 0.0),
    ("1.5", 2.0, 1.5),
    ("x", 3.25, 3.25),
    ("pi", 0.0, math.pi),
    ("-x", 2.0, -2.0),
    ("+x", 2.0, 2.0),
    ("x + 1", 2.0, 3.0),
    ("1 - 2 - 3", 0.0, -4.0),
    ("12/3/2", 0.0, 2.0),
    ("2 + 3*4", 0.0, 14.0),
    ("2*3 + 4", 0.0, 10.0),
    ("(2 + 3)*4", 0.0, 20.0),
    ("2^10", 0.0, 1024.0),
    # exponentiation associates to the right
    ("2^3^2", 0.0, 512.0),
    ("(2^3)^2", 0.0, 64.0),
    # unary minus binds looser than ^ ...
    ("-x^2", 2.0, -4.0),
    ("-2^2", 0.0, -4.0),
    ("(-x)^2", 2.0, 4.0),
    # ... but is allowed inside an exponent
    ("2^-3", 0.0, 0.125),
    ("2^-x", 2.0, 0.25),
    ("--x", 1.5, 1.5),
    ("2*-3", 0.0, -6.0),
    ("-x*x", 3.0, -9.0),
    ("x/4 + x*x/2", 2.0, 2.5),
    ("sin(0)", 1.0, 0.0),
    ("sin(pi/2)", 0.0, 1.0),
    ("cos(pi)", 0.0, -1.0),
    ("exp(1)", 0.0, math.e),
    ("sqrt(x^2)", -3.0, 3.0),
    ("abs(-x)", -4.0, 4.0),
    ("sin(x)^2 + cos(x)^2", 0.7, 1.0),
    ("exp(-x^2/2)", 1.0, math.exp(-0.5)),
    ("1/(1 + x^2)", 2.0, 0.2),
    ("0.5*x^2", 3.0, 4.5),
    ("x^0.5", 9.0, 3.0),
    ("2e3 + 1", 0.0, 2001.0),
    (".5*x", 8.0, 4.0),
    ("1.25e-2", 0.0, 0.0125),
    ("sqrt(abs(x))", -16.0, 4.0),
    ("cos(x - x)", 123.4, 1.0),
]

PARSE_ERROR_CASES = [
    ("", 0),
    ("   ", 0),
    ("x +", 3),
    ("(x + 1", 0),
    ("x + 1)", 5),
    ("sin x", 0),
    ("sin()", 4),
    ("2 sin(x)", 2),
    ("foo(x)", 0),
    ("z + 1", 0),
    ("x $ 2", 2),
    ("2x", 1),
    ("x + * 2", 4),
]

EVAL_ERROR_CASES = [
    ("1/0", 0.0),
    ("1/(x - 2)", 2.0),
    ("sqrt(-4)", 0.0),
    ("sqrt(x)", -1.0),
    ("(-2)^0.5", 0.0),
    ("y", 1.0),
    ("exp(x)", 1000.0),
]


@pytest.mark.parametrize("src,point,expected", EVAL_CASES)
def test_eval_case(src, point, expected):
    value = eval_potential(parse_potential(src), point)
    assert value == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("src,offset", PARSE_ERROR_CASES)
def test_parse_error_case(src, offset):
    with pytest.raises(ParseError) as excinfo:
        parse_potential(src)
    assert excinfo.value.offset == offset
    assert f"(offset {offset})" in str(excinfo.value)


@pytest.mark.filterwarnings("ignore:overflow")
@pytest.mark.parametrize("src,point", EVAL_ERROR_CASES)
def test_eval_error_case(src, point):
    expr = parse_potential(src)
    with pytest.raises(EvalError):
        eval_potential(expr, point)


@pytest.mark.parametrize("src", [case[0] for case in EVAL_CASES])
def test_print_parse_roundtrip(src):
    tree = parse_potential(src)
    canonical = print_expr(tree)
    reparsed = parse_potential(canonical)
    assert reparsed == tree
    assert print_expr(reparsed) == canonical


def test_random_points_match_reference():
    src = "0.3*x^4 - 2*x^2 + sin(3*x) + exp(-x^2/2) + abs(x)/(1 + x^2)"
    expr = parse_potential(src)

    def reference(x):
        return (0.3 * x**4 - 2 * x**2 + math.sin(3 * x)
                + math.exp(-(x**2) / 2) + abs(x) / (1 + x**2))

    rng = np.random.default_rng(11)
    for x in rng.uniform(-3.0, 3.0, size=1000):
        got = eval_potential(expr, float(x))
        want = reference(float(x))
        assert got == pytest.approx(want, rel=1e-12)


def test_grid_eval_matches_pointwise():
    g = Grid.line(-2.0, 2.0, 101)
    x = g.coords()[0]
    expr = parse_potential("0.5*x^2 + sin(x)")
    values = eval_on_grid(expr, g)
    for i in (0, 17, 50, 100):
        assert values[i] == pytest.approx(eval_potential(expr, x[i]), rel=1e-14)


def test_grid_eval_broadcasts_constants():
    g = Grid.line(-1.0, 1.0, 9)
    values = eval_on_grid(parse_potential("pi"), g)
    assert values.shape == g.shape
    assert np.all(values == math.pi)


def test_grid_eval_rejects_singular_node():
    g = Grid.line(-1.0, 1.0, 21)  # contains x = 0
    with pytest.raises(EvalError):
        eval_on_grid(parse_potential("1/x"), g)


def test_two_dimensional_expression():
    expr = parse_potential("x^2 + 3*y")
    assert eval_potential(expr, (2.0, 1.0)) == pytest.approx(7.0, rel=1e-14)
    g = Grid((-1.0, -1.0), (1.0, 1.0), (11, 11))
    values = eval_on_grid(expr, g)
    X, Y = g.coords()
    assert np.allclose(values, X**2 + 3 * Y, rtol=1e-14, atol=0)


def test_corpus_is_large_enough():
    assert len(EVAL_CASES) + len(PARSE_ERROR_CASES) + len(EVAL_ERROR_CASES) >= 40
