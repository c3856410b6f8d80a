#!/usr/bin/env python3
"""Brute-force evaluation of the small golden cases.

Evaluates the symmetric per-row, reshaped group and cross-scaled quantizers
directly from their defining formulas with exact rationals (Fraction) or
50-digit decimals where a square root appears. Values printed here are frozen
into tests/test_golden.cpp; this script does not share code with the library.
"""
from decimal import Decimal, getcontext, ROUND_HALF_UP
from fractions import Fraction as F
from itertools import product

getcontext().prec = 50


def rha(v):
    # Decimal ROUND_HALF_UP rounds ties away from zero.
    d = Decimal(v.numerator) / Decimal(v.denominator) if isinstance(v, F) else Decimal(v)
    return int(d.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def per_row(rows, bits):
    q = 2 ** (bits - 1) - 1
    out = []
    for r in rows:
        t = max(abs(v) for v in r)
        out.append([0 if t == 0 else rha(v * q / t) for v in r])
    return out


def dec(x):
    return Decimal(x.numerator) / Decimal(x.denominator) if isinstance(x, F) else Decimal(x)


def cross(rows, bits, alpha):
    q = 2 ** (bits - 1) - 1
    t = [max(abs(v) for v in r) for r in rows]
    c = [max(abs(r[j]) for r in rows) for j in range(len(rows[0]))]
    a = Decimal(alpha)
    codes, scales = [], []
    for i, r in enumerate(rows):
        cr, sr = [], []
        for j, v in enumerate(r):
            s = (dec(t[i]) ** a) * (dec(c[j]) ** (1 - a))
            sr.append(s)
            cr.append(rha(dec(v) * q / s))
        codes.append(cr)
        scales.append(sr)
    return t, c, codes, scales


def main():
    print("per_token [2, -1, 0.006] bits=8:", per_row([[F(2), F(-1), F(6, 1000)]], 8))
    print("per_token [1, -1] bits=4:", per_row([[F(1), F(-1)]], 4))
    print("per_channel [0.5, -0.25] bits=8:", per_row([[F(1, 2), F(-1, 4)]], 8))
    flat = [F(1), F(2), F(4), F(8)]
    print("group [[1,2],[4,8]] g=2 bits=8:", per_row([flat[0:2], flat[2:4]], 8))

    x = [[F(10), F(3, 100)], [F(5, 100), F(2, 10)]]
    t, c, codes, scales = cross(x, 8, "0.5")
    print("cross t", t, "c", c, "codes", codes)
    print("cross numerators", [[str(s) for s in r] for r in scales])
    deq = [[Decimal(codes[i][j]) * scales[i][j] / 127 for j in range(2)] for i in range(2)]
    print("cross dequant", [[str(v) for v in r] for r in deq])
    print("per_token codes on same x", per_row(x, 8))

    deq_pt = [F(127) * F(2) / 127, F(-64) * F(2) / 127, F(0)]
    print("per_token dequant", [str(dec(v)) for v in deq_pt])
    y = F(2) - 1 + F(6, 1000)
    yq = sum(deq_pt)
    err_full = abs(y - yq) / abs(y)
    err_remove = abs(y - (F(2) - 1)) / abs(y)
    print("matmul_error full", dec(err_full))
    print("matmul_error remove", dec(err_remove))
    print("ratio", dec(err_remove / err_full))
    print("zero bound t=2 bits=8", dec(F(1, 2) * 2 / 127))

    ge = sum(1 for i, j in product(range(2), range(2)) if c[j] >= t[i])
    print("frac_c_ge_t", F(ge, 4))

    rb = [F(3), F(-1), F(1, 2), F(2)]
    order = sorted(range(4), key=lambda k: (abs(rb[k]), k))
    zeroed = [0 if k in order[:2] else rb[k] for k in range(4)]
    print("remove_by_proportion p=0.5", zeroed)


if __name__ == "__main__":
    main()
