"""Acceptance criteria, one test each.  Every test prints a single PASS/FAIL line."""

import hashlib
import math
import os
import random
import time

import numpy as np
import pytest

from oracles import coefficient_box, naive_minima
from starcount.bounds import BoundQuery, dyadic_sigma_chain, rhs_main_theorem
from starcount.certify import PhiSpec, certify_phi, min_weighted_product
from starcount.counting import brute_count_M, sum_S, sum_Sigma, tile_count_M
from starcount.experiments import ExperimentConfig, csv_text, run_experiment
from starcount.lattice import LatticeBasis, exact_successive_minima, int_det, support_monotone_basis
from starcount.schmidt import cover_prefix, dyadic_family, dyadic_family_size
from starcount.tessellation import SlabDomainH2, StarBodyH1, partition_h1, star_member, tessellate_h2
from starcount.weights import build_schedule, random_support_matrix, verify_identities

GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.fixture
def verdict(capsys):
    def report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail
    return report


def test_c01_weight_identities(verdict):
    start = time.perf_counter()
    rng = random.Random(1)
    failures = 0
    for _ in range(1000):
        t = random_support_matrix(rng.randint(1, 4), rng.randint(1, 4), rng)
        failures += not verify_identities(t, build_schedule(t)).ok
    dt = time.perf_counter() - start
    verdict("C1 weight identities", failures == 0 and dt < 5,
            f"{failures} failures over 1000 matrices in {dt:.2f}s (limit 5s)")


def _cover_is_exact(cov, k, s):
    if len(cov) > s:
        return False
    pos = 0
    for iv in cov:
        size = iv.hi - iv.lo
        # Member of the family: length 2^a, left end divisible by it, right end below 2^s.
        if iv.lo != pos or size & (size - 1) or iv.lo % size or iv.hi >= 2 ** s:
            return False
        pos = iv.hi
    return pos == k


def test_c02_dyadic_covering(verdict):
    start = time.perf_counter()
    bad = [(k, s) for s in range(1, 13) for k in range(2 ** s) if not _cover_is_exact(cover_prefix(k, s), k, s)]
    sizes_ok = all(len(dyadic_family(s)) == dyadic_family_size(s) == 2 ** (s + 1) - s - 2 for s in range(1, 21))
    dt = time.perf_counter() - start
    verdict("C2 dyadic covering", not bad and sizes_ok and dt < 5,
            f"{len(bad)} bad covers for s<=12, family sizes ok={sizes_ok}, {dt:.2f}s (limit 5s)")


def test_c03_tile_count_equals_brute(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    shapes = [(1, 1), (1, 2), (2, 1)]
    mismatches = []
    for i in range(100):
        m, n = shapes[i % 3]
        L = rng.uniform(-3, 3, (m, n))
        T = rng.integers(1, 51, n).astype(float)
        R = rng.uniform(0.2, 2.0)
        eps = R ** m * math.exp(-rng.uniform(-1, 6))
        a, b = tile_count_M(L, eps, R, T), brute_count_M(L, eps, R, T)
        if a != b:
            mismatches.append((i, a, b))
    dt = time.perf_counter() - start
    verdict("C3 tile_count_M == brute_count_M", not mismatches and dt < 60,
            f"{len(mismatches)} mismatches over 100 instances in {dt:.1f}s (limit 60s)")


def test_c04_tessellation_contracts(verdict):
    rng = np.random.default_rng(4)
    worst, located = 0.0, 0
    for n, T in [(1, (50.0,)), (2, (20.0, 7.0)), (3, (9.0, 4.0, 30.0))]:
        dom = SlabDomainH2(n, 0.05, 0.8, T)
        fam = tessellate_h2(dom)
        sums_ok = all(fam.map_of(i).exponent_sum == 0 for i in fam.indices)
        count = 3334 if n < 3 else 3332
        y = np.exp(rng.uniform(0, 1, (count, n)) * np.log(T)) * rng.choice([-1.0, 1.0], (count, n))
        cap = np.minimum(dom.R, dom.epsilon / np.prod(np.abs(y), axis=1))
        x0 = rng.uniform(1e-12, 1, count) * cap * rng.choice([-1.0, 1.0], count)
        for x in np.column_stack([x0, y]):
            img = fam.image(x)
            located += 1
            worst = max(worst, img[0] - dom.epsilon, -img[0], float(np.max(1 - np.abs(img[1:]))),
                        float(np.max(np.abs(img[1:]) - math.e)))
        if not sums_ok:
            break
    covering_ok = sums_ok and located == 10 ** 4 and worst <= 1e-9

    unique_ok = True
    for m in (1, 2, 3):
        body = StarBodyH1(m, 10.0 ** (-2 * m), 1.0)
        fam = partition_h1(body)
        pts = []
        while len(pts) < 3334:
            u = rng.uniform(math.log(body.epsilon) - 3, 0, (5000, m))
            keep = u[u.sum(axis=1) < math.log(body.epsilon)]
            pts.extend(np.exp(keep) * rng.choice([-1.0, 1.0], keep.shape))
        X = np.array(pts[:3334])
        K, ok = fam.locate_many(X)
        claims = sum(np.all(K == np.asarray(k), axis=1) & ok for k in fam.indices)
        outside = rng.uniform(-1.5, 1.5, (3334, m))
        outside = outside[[not star_member(p, body, "plus") for p in outside]]
        _, ok_out = fam.locate_many(outside)
        sums = all(sum(k) == 0 for k in fam.indices)
        unique_ok &= bool(np.all(claims == 1)) and not ok_out.any() and sums
    verdict("C4 tessellation contracts", covering_ok and unique_ok,
            f"H2: {located} points located, worst box excess {worst:.2e}; H1 unique membership={unique_ok}")


def _bases(seed, count):
    rng = np.random.default_rng(seed)
    limits = {2: 30, 3: 20, 4: 10}
    out = []
    while len(out) < count:
        d = int(rng.integers(2, 5))
        B = rng.uniform(-5, 5, (d, d))
        if abs(np.linalg.det(B)) > 0.5 and coefficient_box(B) <= limits[d]:
            out.append(B)
    return out


def test_c05_exact_minima(verdict):
    worst, ratio_ok = 0.0, True
    for B in _bases(5, 200):
        d = B.shape[0]
        prof = exact_successive_minima(LatticeBasis(B))
        ref = naive_minima(B, coefficient_box(B))
        worst = max(worst, max(abs(a - b) for a, b in zip(prof.minima, ref)))
        ratio_ok &= 2.0 ** -d <= prof.minkowski_ratio() <= 2.0 ** d
    verdict("C5 exact minima", worst <= 1e-9 and ratio_ok,
            f"max |delta - oracle| = {worst:.2e} over 200 bases, Minkowski ratios in range={ratio_ok}")


def test_c06_support_monotone(verdict):
    rng = np.random.default_rng(6)
    bad = completed = done = 0
    while done < 200:
        if done % 4 == 0:
            # Near-cubic lattice plus a half-diagonal vector: in d = 5 the minima
            # realizers span an index-2 sublattice, so the completion step runs.
            d = 5
            M = np.eye(d)
            M[:, -1] = 0.5
            B = (np.eye(d) + rng.uniform(-0.03, 0.03, (d, d))) @ M
        else:
            d = int(rng.integers(2, 6))
            B = rng.uniform(-5, 5, (d, d))
            if abs(np.linalg.det(B)) < 0.5:
                continue
        mono = support_monotone_basis(exact_successive_minima(LatticeBasis(B)))
        completed += mono.completed
        det = int_det([[int(v) for v in row] for row in mono.coefficients])
        nested = all(a <= b for a, b in zip(mono.supports, mono.supports[1:]))
        bad += not (abs(det) == 1 and nested and all(0 <= c <= d for c in mono.shifts))
        done += 1
    verdict("C6 support-monotone transform", bad == 0,
            f"{bad} failures over 200 profiles ({completed} needed basis completion)")


def test_c07_main_theorem_empirical(verdict):
    start = time.perf_counter()
    L = [[GOLDEN]]
    phi = PhiSpec("const", 0.38)
    cert = certify_phi(L, phi, 10 ** 4)
    worst = 0.0
    for R in (0.5, 1.0):
        for j in range(1, 7):
            eps = math.exp(-j) * R
            for T in (1e2, 1e3, 1e4):
                lhs = brute_count_M(L, eps, R, [T])
                worst = max(worst, lhs / rhs_main_theorem(BoundQuery(1, 1, eps, R, (T,), phi)))
    dt = time.perf_counter() - start
    verdict("C7 main theorem ratio", cert.holds and worst <= 10 and dt < 120,
            f"{cert.scope}, max count/bound = {worst:.3f} (limit 10), {dt:.1f}s (limit 120s)")


def test_c08_kruse_bhv(verdict):
    start = time.perf_counter()
    kr = run_experiment(ExperimentConfig("kruse", 7, {"alpha_samples": 5, "T": [1e3, 1e4, 1e5, 1e6]}))
    spread = max(kr.summary["spread_per_sample"].values())
    bhv = run_experiment(ExperimentConfig("bhv", 7, {"n": 2, "alpha_samples": 20,
                                                      "T": [[10, 1e4], [1e2, 1e3], [1e3, 1e3], [1e4, 10]]}))
    frac = bhv.summary["samples_in_band"] / bhv.summary["samples"]
    dt = time.perf_counter() - start
    verdict("C8 kruse/bhv", spread <= 6 and frac >= 0.9 and dt < 600,
            f"kruse max spread {spread:.3f} (limit 6); bhv in [0.2,20] for {frac:.0%} of alphas; {dt:.1f}s")


def test_c09_sigma_chain(verdict):
    rng = np.random.default_rng(9)
    shapes = [(1, 1), (1, 2), (2, 1)]
    failures, done = 0, 0
    while done < 50:
        m, n = shapes[done % 3]
        T = tuple(float(t) for t in rng.integers(2, 40 if n == 1 else 12, n))
        L = rng.uniform(0, 1, (m, n))
        val, _ = min_weighted_product(L, int(max(T)))
        if val <= 1e-6:
            continue
        phi = PhiSpec("const", min(1.0, val / 2))
        if not certify_phi(L, phi, int(max(T))).holds:
            continue
        failures += dyadic_sigma_chain(L, T, phi).value < sum_Sigma(L, T)
        done += 1
    verdict("C9 dyadic Sigma chain", failures == 0, f"{failures} failures over 50 certified instances")


def test_c10_mean_counts(verdict):
    cfg = ExperimentConfig("mean-count", 10)
    a, b = run_experiment(cfg), run_experiment(cfg)
    reproducible = csv_text(a) == csv_text(b)
    worst = max(r.ratio for r in a.rows)
    worst_row = max(a.rows, key=lambda r: r.ratio)
    se = worst_row.extra["stderr"] / worst_row.rhs
    verdict("C10 mean-count envelopes", worst <= 5 and reproducible,
            f"{len(a.rows)} rows, max mean/envelope-base = {worst:.3f} +- {se:.3f} (limit 5), reproducible={reproducible}")


def test_c11_determinism_and_speed(verdict):
    cfg = ExperimentConfig("bhv", 11, {"alpha_samples": 4})
    h1 = hashlib.sha256(csv_text(run_experiment(cfg)).encode()).hexdigest()
    h2 = hashlib.sha256(csv_text(run_experiment(cfg)).encode()).hexdigest()
    alpha = [math.sqrt(2) - 1, math.sqrt(3) - 1]
    sum_S(alpha, [10, 10], workers=4)  # compile outside the timing
    t0 = time.perf_counter()
    v1 = sum_S(alpha, [1e3, 1e3], workers=1)
    single = time.perf_counter() - t0
    t0 = time.perf_counter()
    v4 = sum_S(alpha, [1e3, 1e3], workers=4)
    quad = time.perf_counter() - t0
    speedup = single / quad
    ok = h1 == h2 and single < 10 and speedup >= 2 and abs(v1 - v4) <= 1e-10 * abs(v1)
    verdict("C11 determinism/performance", ok,
            f"CSV hashes equal={h1 == h2}; single worker {single:.3f}s (limit 10s); "
            f"4 workers speedup {speedup:.2f}x (need 2x) on {os.cpu_count()} CPU(s)")
