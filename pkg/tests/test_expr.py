"""Expression layer: parsing, printing, evaluation, exact differentiation.

CORPUS pairs each expression with a sampling window on which it is smooth
and defined; the window keeps log arguments positive and denominators away
from zero.  The derivative check compares the exact tree derivative against
a central difference, which is an independent route through the numbers.
"""

import numpy as np
import pytest

from demoulin.errors import EvalDomainError, ParseError
from demoulin.expr import (Const, Var, differentiate, evaluate,
                           evaluate_array, parse, to_string)

# (text, x window, y window)
CORPUS = [
    ("1", (-2.0, 2.0), (-2.0, 2.0)),
    ("-1.5", (-2.0, 2.0), (-2.0, 2.0)),
    ("x", (-2.0, 2.0), (-2.0, 2.0)),
    ("y", (-2.0, 2.0), (-2.0, 2.0)),
    ("x + y", (-2.0, 2.0), (-2.0, 2.0)),
    ("x - y", (-2.0, 2.0), (-2.0, 2.0)),
    ("x*y", (-2.0, 2.0), (-2.0, 2.0)),
    ("x/y", (-2.0, 2.0), (0.5, 2.0)),
    ("x^2", (-2.0, 2.0), (-2.0, 2.0)),
    ("x^3 - 2*x + 1", (-2.0, 2.0), (-2.0, 2.0)),
    ("y^-2", (-2.0, 2.0), (0.5, 2.0)),
    ("exp(x)", (-2.0, 2.0), (-2.0, 2.0)),
    ("exp(x + y)", (-1.5, 1.5), (-1.5, 1.5)),
    ("log(1 + x^2)", (-2.0, 2.0), (-2.0, 2.0)),
    ("log(x)", (0.5, 3.0), (-2.0, 2.0)),
    ("sin(x)*cos(y)", (-2.0, 2.0), (-2.0, 2.0)),
    ("sin(x*y)", (-2.0, 2.0), (-2.0, 2.0)),
    ("cos(x^2 - y)", (-2.0, 2.0), (-2.0, 2.0)),
    ("sinh(x)", (-2.0, 2.0), (-2.0, 2.0)),
    ("cosh(x - y)", (-2.0, 2.0), (-2.0, 2.0)),
    ("tanh(3*x)", (-2.0, 2.0), (-2.0, 2.0)),
    ("1/(1 + x^2)", (-2.0, 2.0), (-2.0, 2.0)),
    ("x*y^2 - 3/(1 + x)", (0.0, 2.0), (-2.0, 2.0)),
    ("exp(-x^2 - y^2)", (-2.0, 2.0), (-2.0, 2.0)),
    ("(x + y)^4", (-2.0, 2.0), (-2.0, 2.0)),
    ("(1 + x*y)^-3", (0.1, 0.9), (0.1, 0.9)),
    ("exp(x)*sin(y) + log(2 + x)", (-1.0, 2.0), (-2.0, 2.0)),
    ("tanh(x*y) + cosh(x)/sinh(1 + x)", (0.2, 2.0), (-2.0, 2.0)),
    ("-(x + y)^2", (-2.0, 2.0), (-2.0, 2.0)),
    ("x^2*y^3/(1 + exp(x - y))", (-2.0, 2.0), (-2.0, 2.0)),
]


def sample_points(xw, yw, n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(xw[0], xw[1], n)
    ys = rng.uniform(yw[0], yw[1], n)
    return xs, ys


def derivative_vs_fd_max(expr_text, xw, yw, n_points=100, seed=0):
    """Worst normalized gap between the tree derivative and a central
    difference over seeded sample points, for both variables."""
    tree = parse(expr_text)
    dx = differentiate(tree, "x")
    dy = differentiate(tree, "y")
    xs, ys = sample_points(xw, yw, n_points, seed)
    h = 1e-6
    worst = 0.0
    for x, y in zip(xs, ys):
        for d, fd in (
            (evaluate(dx, x, y),
             (evaluate(tree, x + h, y) - evaluate(tree, x - h, y)) / (2 * h)),
            (evaluate(dy, x, y),
             (evaluate(tree, x, y + h) - evaluate(tree, x, y - h)) / (2 * h)),
        ):
            worst = max(worst, abs(d - fd) / (1.0 + abs(d)))
    return worst


def test_parse_value_example():
    assert evaluate(parse("x*y^2 - 3/(1 + x)"), 2.0, 1.0) == 1.0


def test_parse_hyperbolic_example():
    v = evaluate(parse("sinh(x)*cosh(x)"), 1.0, 0.0)
    assert abs(v - 1.8134302039235093) < 1e-15


@pytest.mark.parametrize("text,xw,yw", CORPUS, ids=[c[0] for c in CORPUS])
def test_corpus_roundtrip(text, xw, yw):
    tree = parse(text)
    reparsed = parse(to_string(tree))
    # spans differ, structure must not
    assert reparsed == tree
    xs, ys = sample_points(xw, yw, 20, seed=hash(text) % 2**32)
    for x, y in zip(xs, ys):
        assert evaluate(reparsed, x, y) == evaluate(tree, x, y)


@pytest.mark.parametrize("text,xw,yw", CORPUS, ids=[c[0] for c in CORPUS])
def test_corpus_derivative_matches_fd(text, xw, yw):
    assert derivative_vs_fd_max(text, xw, yw) <= 1e-5


@pytest.mark.parametrize("text,offset", [
    ("x +", 3),
    ("x ^ y", 4),
    ("foo(x)", 0),
    ("x + z", 4),
    ("(x", 2),
    ("x 2", 2),
    ("x^2.5", 3),
])
def test_parse_error_offsets(text, offset):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.offset == offset


def test_parse_rejects_empty():
    with pytest.raises(ParseError):
        parse("")


def test_evaluate_division_by_zero():
    with pytest.raises(EvalDomainError) as exc:
        evaluate(parse("1/x"), 0.0, 0.0)
    assert "(1.0 / x)" in str(exc.value)


def test_evaluate_log_domain():
    with pytest.raises(EvalDomainError):
        evaluate(parse("log(x)"), -1.0, 0.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("log(x)"), 0.0, 0.0)


def test_evaluate_negative_power_at_zero():
    with pytest.raises(EvalDomainError):
        evaluate(parse("x^-2"), 0.0, 0.0)


def test_evaluate_array_allows_nonfinite():
    vals = evaluate_array(parse("1/x"), np.array([0.0, 2.0]), np.zeros(2))
    assert np.isinf(vals[0]) and vals[1] == 0.5


def test_evaluate_array_broadcasts():
    x = np.linspace(0.0, 1.0, 3)[:, None]
    y = np.linspace(0.0, 1.0, 4)[None, :]
    vals = evaluate_array(parse("x + 2*y"), x, y)
    assert vals.shape == (3, 4)
    assert np.allclose(vals, x + 2 * y)
    ones = evaluate_array(parse("1"), x, y)
    assert ones.shape == (3, 4) and np.all(ones == 1.0)


def test_derivative_simplifies_products():
    assert differentiate(parse("x*y"), "x") == Var("y")
    assert differentiate(parse("1"), "x") == Const(0.0)
    assert differentiate(parse("x"), "y") == Const(0.0)


def test_third_derivatives_stay_finite_sized():
    # repeated differentiation must not blow up the tree
    tree = parse("exp(x)*sin(y) + log(2 + x)")
    for var in ("x", "x", "y"):
        tree = differentiate(tree, var)
    assert len(to_string(tree)) < 2000
    # d3/dy dx dx of exp(x)sin(y) is exp(x)cos(y); the log term drops out
    assert abs(evaluate(tree, 0.3, 0.4) - np.exp(0.3) * np.cos(0.4)) < 1e-12
