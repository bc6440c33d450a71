"""Arithmetic expressions over node coordinates, evaluated without eval()."""
import ast
import operator

import numpy as np

from .surface import TORUS

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
CONSTANTS = {"pi": np.pi}

_BINARY = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


class ExpressionError(ValueError):
    pass


def coordinate_variables(base):
    """x, y on the torus; lat, lon (and x, y, z) on the sphere."""
    if base.kind == TORUS:
        return {"x": base.x, "y": base.y}
    X, Y, Z = base.verts.T
    return {"lat": base.latitude, "lon": base.longitude, "latitude": base.latitude,
            "longitude": base.longitude, "x": X, "y": Y, "z": Z}


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        # numpy scalars turn 1/0 or overflow into inf, caught below
        return np.float64(node.value)
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in CONSTANTS:
            return np.float64(CONSTANTS[node.id])
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        return _BINARY[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        fn = FUNCTIONS.get(node.func.id)
        if fn is None or len(node.args) != 1:
            raise ExpressionError(f"unsupported call {node.func.id!r}")
        return fn(_eval(node.args[0], env))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def evaluate(text, base):
    """Node values of ``text`` on ``base``; constants broadcast to every node."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    with np.errstate(all="ignore"):
        out = np.broadcast_to(np.asarray(_eval(tree, coordinate_variables(base)), dtype=float),
                              (base.node_count,)).copy()
    if not np.all(np.isfinite(out)):
        raise ExpressionError(f"{text!r} is not finite at every node")
    return out
