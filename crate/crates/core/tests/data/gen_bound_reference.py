# Regenerates bound_reference.json: 50-digit evaluations of the three bound
# formulas at random, exactly representable f64 inputs.
import json, random
from mpmath import mp, mpf, exp, expm1

mp.dps = 50
rng = random.Random(20240611)

def upper(v0, lam, beta, H, K):
    return exp(-lam * K) * (v0 + beta * expm1(lam * H) / lam)

def lower1(v0, beta, M, lam, H, K):
    d = M * exp(-lam * (H - K))
    return (v0 - abs(beta) * H - d) / (1 - d), (v0 - abs(beta) * H - d), 1 - d

def lower2(v0, beta, M, lam, H, K):
    d = M * exp(lam * (2 * K - H))
    gamma = beta / lam * (1 - exp(-lam * K))
    return (v0 + gamma - d) / (exp(lam * K) - d), (v0 + gamma - d), exp(lam * K) - d

def loguniform(a, b):
    return 10 ** rng.uniform(a, b)

def well_conditioned(num, parts):
    # keep tuples whose numerator is not a near-cancellation
    return abs(num) > mpf("1e-3") * max(abs(p) for p in parts)

rows = {"upper": [], "lower1": [], "lower2": []}
while len(rows["upper"]) < 100:
    v0, lam, beta = rng.uniform(0, 2), loguniform(-6, 0.5), loguniform(-8, 0)
    H = rng.uniform(0.5, 20); K = rng.uniform(0.01, 1) * H
    r = upper(*map(mpf, (v0, lam, beta, H, K)))
    rows["upper"].append({"v0": v0, "lambda": lam, "beta": beta, "horizon": H, "threshold": K, "value": str(r)})
while len(rows["lower1"]) < 100:
    v0, lam, beta, M = rng.uniform(0, 2), loguniform(-3, 0.5), -loguniform(-8, -2), rng.uniform(0.1, 2)
    H = rng.uniform(0.5, 20); K = rng.uniform(0.01, 1) * H
    a = list(map(mpf, (v0, beta, M, lam, H, K)))
    val, num, den = lower1(*a)
    if den <= 0 or not well_conditioned(num, [a[0], abs(a[1]) * a[4], 1 - den]) or den < mpf("1e-6"):
        continue
    rows["lower1"].append({"v0": v0, "beta": beta, "m": M, "lambda": lam, "horizon": H, "threshold": K, "value": str(val)})
while len(rows["lower2"]) < 100:
    v0, lam, beta, M = rng.uniform(-1, 2), loguniform(-3, 0.5), loguniform(-8, 0), rng.uniform(0.1, 2)
    H = rng.uniform(0.5, 20); K = rng.uniform(0.01, 0.5) * H
    a = list(map(mpf, (v0, beta, M, lam, H, K)))
    val, num, den = lower2(*a)
    if den <= 0 or den < mpf("1e-6") * exp(a[3] * a[5]):
        continue
    gamma = a[1] / a[3] * (1 - exp(-a[3] * a[5]))
    if not well_conditioned(num, [a[0], gamma, a[2] * exp(a[3] * (2 * a[5] - a[4]))]):
        continue
    rows["lower2"].append({"v0": v0, "beta": beta, "m": M, "lambda": lam, "horizon": H, "threshold": K, "value": str(val)})

with open("bound_reference.json", "w") as f:
    json.dump(rows, f, indent=1)
