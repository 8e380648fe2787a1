# symlift/utils.py
import itertools
from fractions import Fraction
from typing import Iterator, Sequence


def bit_length(n: int) -> int:
    """|n|：n を二進で書くのに必要なビット数（|0| = 0 の慣習、|1| = 1）"""
    return abs(n).bit_length()


def magnitude_bits(q: Fraction) -> int:
    """分子・分母の絶対値ビット数の大きい方（最低 1）"""
    return max(1, abs(q.numerator).bit_length(), q.denominator.bit_length())


def binary_digits(value: int, width: int) -> list[int]:
    """value の width 桁の二進表現を LSB から順に返す"""
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return [(value >> k) & 1 for k in range(width)]


def zero_one_points(count: int) -> Iterator[tuple[int, ...]]:
    # 辞書式順で {0,1}^count を列挙
    return itertools.product((0, 1), repeat=count)


def distinct_tuples(n: int, k: int) -> list[tuple[int, ...]]:
    """[n]^{(k)}：k ≤ n なら相異なる成分の k 組、k > n なら先頭 n 成分が相異なり残りが n 番目の成分の繰り返し"""
    if k <= n:
        return list(itertools.permutations(range(1, n + 1), k))
    out = []
    for head in itertools.permutations(range(1, n + 1), n):
        out.append(head + (head[-1],) * (k - n))
    return out


def equality_type(tup: Sequence[int]) -> tuple[int, ...]:
    """各成分を「最初に現れた位置」で置き換えた等号型"""
    first: dict[int, int] = {}
    return tuple(first.setdefault(v, i) for i, v in enumerate(tup))
