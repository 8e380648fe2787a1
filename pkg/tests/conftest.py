# tests/conftest.py
import itertools
from fractions import Fraction

import pytest

from symlift.lp_model import InputVar


def x_vars(n: int, rel: str = "x") -> list[InputVar]:
    return [InputVar(rel, (i,)) for i in range(1, n + 1)]


def fix_bits(variables, bits) -> dict:
    """変数列と 0/1 列から substitute 用の割り当てを作る"""
    return {v: Fraction(b) for v, b in zip(variables, bits)}


def cube_points(width: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=width))


@pytest.fixture(autouse=True)
def _no_guard_override(monkeypatch):
    # 環境に SYMLIFT_GUARD_OVERRIDE が残っていてもガードを効かせる
    monkeypatch.delenv("SYMLIFT_GUARD_OVERRIDE", raising=False)
