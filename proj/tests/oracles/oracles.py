"""Independent reference computations used to freeze expected values in the C++ tests.

Run with: python3 tests/oracles/oracles.py
"""
import math

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state):
    state = (state + GOLDEN) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


class Xoshiro256ss:
    def __init__(self, seed, stream_id):
        st = seed ^ ((GOLDEN * (stream_id + 1)) & M64)
        self.s = []
        for _ in range(4):
            st, out = splitmix64(st)
            self.s.append(out)

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M64, 7) * 9) & M64
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result

    def uniform(self):
        return (self.next() >> 11) * 2.0 ** -53


def center(n):
    return 1.0 / (1.0 + math.exp(-0.6 * math.log(n))) - 0.4 / n


def accuracy(n, r):
    offset = ((2 * r - 1) / 10) * 0.95 ** n
    return min(1.0, max(0.0, center(n) - offset))


def value_iteration(P, R, gamma, tol=1e-14):
    ns, na = len(R), len(R[0])
    Q = [[0.0] * na for _ in range(ns)]
    while True:
        V = [max(q) for q in Q]
        newQ = [[R[s][a] + gamma * sum(P[s][a][t] * V[t] for t in range(ns))
                 for a in range(na)] for s in range(ns)]
        delta = max(abs(newQ[s][a] - Q[s][a]) for s in range(ns) for a in range(na))
        Q = newQ
        if delta < tol:
            return Q


def simulate(policy, ratio, seed, capacity=17_500_000, static_threshold=35):
    """Threshold-policy episode to exhaustion. Returns (iterations, ledger, counts)."""
    E_SLEEP, E_CAP, E_INF, E_UP, E_TRAIN = 50, 180, 17, 3000, 556
    env = Xoshiro256ss(seed, 0)
    ret = Xoshiro256ss(seed, 1)
    remaining = capacity
    ledger = {"sleep": 0, "capture": 0, "infer": 0, "upload": 0, "train": 0}
    counts = {"anomalies": 0, "onboard": 0, "uploads": 0, "attempts": 0, "success": 0}
    budget, n, iters = 0, 0, 0
    T, S = 10, 0  # dynamic policy state

    def draw(cost, key):
        nonlocal remaining
        if cost > remaining:
            return False
        remaining -= cost
        ledger[key] += cost
        return True

    while True:
        if not draw(E_CAP, "capture") or not draw(E_INF, "infer"):
            break
        if env.uniform() < ratio:
            counts["anomalies"] += 1
            if budget > 0:
                budget -= 1
                counts["onboard"] += 1
            else:
                if not draw(E_UP, "upload"):
                    break
                counts["uploads"] += 1
                n = min(n + 1, 255)
                threshold = static_threshold if policy == "static" else T
                if n >= threshold:
                    acc = accuracy(n, ret.uniform())
                    if not draw(E_TRAIN * n, "train"):
                        break
                    counts["attempts"] += 1
                    ok = acc >= 0.85
                    if ok:
                        counts["success"] += 1
                        n = 0
                        budget = 50
                    if policy == "dynamic":
                        if ok:
                            S += 1
                            if S >= 5:
                                T = max(T - 1, 1)
                        else:
                            S = 0
                            T += 1
        if not draw(E_SLEEP, "sleep"):
            break
        iters += 1
    return iters, ledger, counts


if __name__ == "__main__":
    st, out = splitmix64(0)
    print("splitmix64(0) first output: %#018x" % out)
    for sid in range(3):
        g = Xoshiro256ss(42, sid)
        print("seed 42 stream %d raw:" % sid, ["%#018x" % g.next() for _ in range(3)])
    g = Xoshiro256ss(7, 0)
    print("seed 7 stream 0 uniform:", [repr(g.uniform()) for _ in range(3)])

    for n, r in [(1, 0.5), (35, 0.5), (35, 0.0), (35, 0.999999), (10, 0.5), (60, 0.5), (1, 1.0)]:
        print("accuracy(n=%d, r=%g) = %r" % (n, r, accuracy(n, r)))
    for n in [1, 5, 10, 35, 60]:
        print("center(%d)=%r halfwidth=%r" % (n, center(n), 0.1 * 0.95 ** n))

    # Deterministic 2-state / 2-action toy MDP used by the Q-learning convergence test.
    P = [[[1.0, 0.0], [0.0, 1.0]],
         [[1.0, 0.0], [0.0, 1.0]]]
    R = [[0.0, 1.0],
         [2.0, -1.0]]
    Q = value_iteration(P, R, 0.95)
    print("toy MDP Q*:", [[repr(v) for v in row] for row in Q])
    print("epsilon after 100 steps:", repr(0.99 ** 100))
    print("baseline hours:", 17_500_000 // 247)
    for policy, ratio, seed in [("static", 0.05, 1), ("dynamic", 0.05, 1), ("static", 0.2, 3), ("dynamic", 0.4, 2)]:
        print("simulate(%s, %g, seed %d):" % (policy, ratio, seed), simulate(policy, ratio, seed))
