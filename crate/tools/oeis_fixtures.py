"""Write offline OEIS fixtures for sequences with well-known closed definitions.

Usage: python3 tools/oeis_fixtures.py crates/core/data/oeis
"""
import json
import sys
from math import comb
from pathlib import Path

TERMS = 40


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def partitions(n):
    p = [1] + [0] * n
    for k in range(1, n + 1):
        for m in range(k, n + 1):
            p[m] += p[m - k]
    return p


def linear(init, rec, count):
    out = list(init)
    while len(out) < count:
        out.append(sum(c * out[-1 - i] for i, c in enumerate(rec)))
    return out[:count]


def motzkin(count):
    m = [1, 1]
    for n in range(2, count):
        m.append(((2 * n + 1) * m[n - 1] + (3 * n - 3) * m[n - 2]) // (n + 2))
    return m[:count]


def schroeder(count):
    s = [1, 2]
    for n in range(2, count):
        s.append((3 * (2 * n - 1) * s[n - 1] - (n - 2) * s[n - 2]) // (n + 1))
    return s[:count]


def series_sqrt_gf(count):
    # 1 + (1 - 3x - sqrt(1 - 6x + 5x^2)) / (2x)
    from fractions import Fraction
    p = [Fraction(1), Fraction(-6), Fraction(5)] + [Fraction(0)] * (count + 2)
    s = [Fraction(1)]
    for n in range(1, count + 2):
        acc = p[n] - sum(s[k] * s[n - k] for k in range(1, n))
        s.append(acc / 2)
    num = [-s[k] for k in range(count + 2)]
    num[0] += 1
    num[1] -= 3
    return [1] + [int(num[k + 1] / 2) for k in range(1, count)]


P = partitions(TERMS + 2)

SEQUENCES = {
    "A000012": (0, [1] * TERMS),
    "A000027": (1, [n for n in range(1, TERMS + 1)]),
    "A000045": (0, [fib(n) for n in range(TERMS)]),
    "A000070": (0, [sum(P[: n + 1]) for n in range(TERMS)]),
    "A000071": (1, [fib(n) - 1 for n in range(1, TERMS + 1)]),
    "A000079": (0, [2**n for n in range(TERMS)]),
    "A000108": (0, [comb(2 * n, n) // (n + 1) for n in range(TERMS)]),
    "A000129": (0, linear([0, 1], [2, 1], TERMS)),
    "A000217": (0, [n * (n + 1) // 2 for n in range(TERMS)]),
    "A000225": (0, [2**n - 1 for n in range(TERMS)]),
    "A000337": (0, [(n - 1) * 2**n + 1 for n in range(TERMS)]),
    "A000931": (0, linear([1, 0, 0], [0, 1, 1], TERMS)),
    "A001006": (0, motzkin(TERMS)),
    "A001477": (0, list(range(TERMS))),
    "A001519": (0, linear([1, 1], [3, -1], TERMS)),
    "A001629": (0, [sum(fib(k) * fib(n - k) for k in range(n + 1)) for n in range(TERMS)]),
    "A001787": (0, [n * 2 ** (n - 1) if n else 0 for n in range(TERMS)]),
    "A001791": (0, [comb(2 * n, n - 1) if n else 0 for n in range(TERMS)]),
    "A001911": (0, [fib(n + 3) - 2 for n in range(TERMS)]),
    "A002002": (0, [sum(comb(n, k + 1) * comb(n + k, k) for k in range(n)) for n in range(TERMS)]),
    "A002212": (0, series_sqrt_gf(TERMS)),
    "A002378": (0, [n * (n + 1) for n in range(TERMS)]),
    "A004526": (0, [n // 2 for n in range(TERMS)]),
    "A005717": (0, [sum(comb(n, k) * comb(n - k, k + 1) for k in range(n)) if n else 0 for n in range(TERMS)]),
    "A006318": (0, schroeder(TERMS)),
    "A007317": (1, [sum(comb(n, k) * comb(2 * k, k) // (k + 1) for k in range(n + 1)) for n in range(TERMS)]),
    "A008619": (0, [n // 2 + 1 for n in range(TERMS)]),
    "A011782": (0, [1] + [2 ** (n - 1) for n in range(1, TERMS)]),
    "A026905": (1, [sum(P[1 : n + 1]) for n in range(1, TERMS + 1)]),
    "A071724": (0, [1] + [3 * comb(2 * n, n - 1) // (n + 2) for n in range(1, TERMS)]),
    "A212804": (0, linear([1, 0], [1, 1], TERMS)),
}


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/oeis")
    out.mkdir(parents=True, exist_ok=True)
    for ident, (offset, terms) in sorted(SEQUENCES.items()):
        lines = [f"# {ident}: offline fixture generated from its closed definition"]
        lines += [f"{offset + i} {t}" for i, t in enumerate(terms)]
        (out / f"{ident}.txt").write_text("\n".join(lines) + "\n")
        meta = {"id": ident, "retrieved": "offline-fixture", "terms": len(terms)}
        (out / f"{ident}.json").write_text(json.dumps(meta) + "\n")


if __name__ == "__main__":
    main()
