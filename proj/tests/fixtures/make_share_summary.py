# Builds the share-summary fixture and its expected text without touching
# the C++ code: shares from integer counts, weighted stats by hand.
import math
import random

rng = random.Random(515)
rows = []
for c in range(14):
    cell = f"{c % 5 + 1:02d}{c:03d}-{c % 3 + 1:02d}"
    for year in (2012, 2014):
        pop = 0 if (c, year) == (3, 2014) else rng.randint(40, 4000)
        null = c == 7  # zone without a threshold
        for bw in (5, 10, 15, 20, 25):
            if null:
                rows.append((cell, year, bw, None, None, None, pop))
                continue
            below = min(pop, int(pop * rng.uniform(0.0, 0.01) * bw / 5)) if pop else 0
            above = min(pop - below, int(pop * rng.uniform(0.0, 0.012) * bw / 5)) if pop else 0
            sb = below / pop if pop else 0.0
            sa = above / pop if pop else 0.0
            rows.append((cell, year, bw, sa + sb, sa, sb, pop))

# bandwidth monotonicity is not needed for the layout test, rows stay as drawn
rows.sort(key=lambda r: (r[0], r[1], r[2]))


def fmt(v):
    return "" if v is None else repr(v)


with open("share_summary_input.csv", "w", newline="") as f:
    f.write("cell_id,year,bw,share_tot,share_above,share_below,pop\n")
    for r in rows:
        f.write(f"{r[0]},{r[1]},{r[2]},{fmt(r[3])},{fmt(r[4])},{fmt(r[5])},{r[6]}\n")

seen = set()
observations = 0
for r in rows:
    if r[3] is not None and (r[0], r[1]) not in seen:
        seen.add((r[0], r[1]))
        observations += r[6]

out = f"Shares near the threshold by bandwidth (BW), population weighted, {observations} individuals\n"
out += f"{'Variable':<24}{'Mean':>10}{'St. Dev.':>10}{'Min':>10}{'Max':>10}\n"
for bw in (5, 10, 15, 20, 25):
    group = [r for r in rows if r[2] == bw and r[3] is not None and r[6] > 0]
    for kind, col in (("tot", 3), ("above", 4), ("below", 5)):
        xs = [r[col] for r in group]
        ws = [float(r[6]) for r in group]
        tw = sum(ws)
        mean = sum(w * x for w, x in zip(ws, xs)) / tw
        n = len(xs)
        sd = math.sqrt(sum(w * (x - mean) ** 2 for w, x in zip(ws, xs)) / tw * n / (n - 1)) if n > 1 else 0.0
        label = f"share({kind}), BW: {bw}"
        out += f"{label:<24}{mean:>10.3f}{sd:>10.3f}{min(xs):>10.3g}{max(xs):>10.3g}\n"

with open("share_summary_expected.txt", "w", newline="") as f:
    f.write(out)
