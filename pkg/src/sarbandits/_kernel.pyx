# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial kernels.

Each function runs ``count`` complete strategy runs for trial indices
``first_trial .. first_trial+count-1`` and writes the selections into
``out``.  The arithmetic mirrors ``algorithms.py`` exactly: same RNG, same
pull order, same tie-breaking, same floating-point expressions.

Ties go to the arm with the lower entry in ``Work.rank``: the identity, or
a per-trial random permutation drawn first from the trial stream when
``random_ties`` is set.
"""

from libc.math cimport sqrt
from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t, int8_t
from libc.stdlib cimport malloc, free

import numpy as np

cdef enum:
    UNIFORM = 0
    SR = 1
    SAR = 2
    GAP_E = 3

cdef double TO_UNIT = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + 0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline void rng_seed(Rng* r, uint64_t master, uint64_t trial) noexcept nogil:
    cdef uint64_t x = mix64(master ^ mix64(trial))
    r.s0 = mix64(x)
    x = x + 0x9E3779B97F4A7C15ULL
    r.s1 = mix64(x)
    x = x + 0x9E3779B97F4A7C15ULL
    r.s2 = mix64(x)
    x = x + 0x9E3779B97F4A7C15ULL
    r.s3 = mix64(x)


cdef inline double rng_uniform(Rng* r) noexcept nogil:
    cdef uint64_t result = rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = rotl(r.s3, 45)
    return <double>(result >> 11) * TO_UNIT


cdef inline double draw(Rng* r, int8_t kind, double param) noexcept nogil:
    cdef double u = rng_uniform(r)
    if kind == 0:
        return 1.0 if u < param else 0.0
    return param


cdef inline bint before(const double* v, const int* tie, int a, int b) noexcept nogil:
    return v[a] > v[b] or (v[a] == v[b] and tie[a] < tie[b])


cdef inline void rank_desc(const double* v, const int* tie, int n, int* order) noexcept nogil:
    # insertion sort: decreasing value, ties by increasing tie rank
    cdef int i, j, x
    for i in range(n):
        x = i
        j = i - 1
        while j >= 0 and before(v, tie, x, order[j]):
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = x


cdef inline void gaps_into(const double* v, const int* tie, int n, int m, int* order,
                           double* gaps) noexcept nogil:
    cdef int r, i
    cdef double inside, outside
    rank_desc(v, tie, n, order)
    inside = v[order[m]]
    outside = v[order[m - 1]]
    for r in range(n):
        i = order[r]
        if r < m:
            gaps[i] = v[i] - inside
        else:
            gaps[i] = outside - v[i]


cdef inline void mark_top(const double* v, const int* tie, int K, int m, int* order,
                          uint8_t* row) noexcept nogil:
    cdef int r
    rank_desc(v, tie, K, order)
    for r in range(m):
        row[order[r]] = 1


cdef struct Work:
    double* sums
    int64_t* counts
    double* means
    double* gaps
    int* order
    int* active
    int* pos
    int* rank
    int* tie


cdef int work_alloc(Work* w, int K) noexcept nogil:
    w.sums = <double*>malloc(K * sizeof(double))
    w.counts = <int64_t*>malloc(K * sizeof(int64_t))
    w.means = <double*>malloc(K * sizeof(double))
    w.gaps = <double*>malloc(K * sizeof(double))
    w.order = <int*>malloc(K * sizeof(int))
    w.active = <int*>malloc(K * sizeof(int))
    w.pos = <int*>malloc(K * sizeof(int))
    w.rank = <int*>malloc(K * sizeof(int))
    w.tie = <int*>malloc(K * sizeof(int))
    if (w.sums == NULL or w.counts == NULL or w.means == NULL or w.gaps == NULL
            or w.order == NULL or w.active == NULL or w.pos == NULL
            or w.rank == NULL or w.tie == NULL):
        return -1
    return 0


cdef void work_free(Work* w) noexcept nogil:
    free(w.sums)
    free(w.counts)
    free(w.means)
    free(w.gaps)
    free(w.order)
    free(w.active)
    free(w.pos)
    free(w.rank)
    free(w.tie)


cdef inline void reset(Work* w, Rng* r, int K, bint random_ties) noexcept nogil:
    # w.order doubles as scratch for the Fisher-Yates permutation
    cdef int i, j, x
    for i in range(K):
        w.sums[i] = 0.0
        w.counts[i] = 0
        w.active[i] = i
        w.order[i] = i
    if random_ties:
        for i in range(K - 1, 0, -1):
            j = <int>(rng_uniform(r) * (i + 1))
            x = w.order[i]
            w.order[i] = w.order[j]
            w.order[j] = x
    for i in range(K):
        w.rank[w.order[i]] = i


cdef inline void active_ties(Work* w, int n_active) noexcept nogil:
    cdef int j
    for j in range(n_active):
        w.tie[j] = w.rank[w.active[j]]


cdef inline void pull_phase(Work* w, Rng* r, const int8_t* kinds, const double* params,
                            int n_active, int64_t delta) noexcept nogil:
    cdef int j, a
    cdef int64_t s
    for j in range(n_active):
        a = w.active[j]
        for s in range(delta):
            w.sums[a] += draw(r, kinds[a], params[a])
        w.counts[a] += delta


cdef inline void remove_at(int* arr, int n, int p) noexcept nogil:
    cdef int j
    for j in range(p, n - 1):
        arr[j] = arr[j + 1]


cdef void run_sar(Work* w, Rng* r, const int8_t* kinds, const double* params, int K, int m,
                  const int64_t* n_k, uint8_t* row) noexcept nogil:
    cdef int n_active = K, m_left = m, k, j, best
    cdef int64_t prev = 0
    cdef double inside
    for k in range(K - 1):
        if m_left == 0:
            return
        if m_left == n_active:
            break
        pull_phase(w, r, kinds, params, n_active, n_k[k] - prev)
        prev = n_k[k]
        for j in range(n_active):
            w.means[j] = w.sums[w.active[j]] / <double>w.counts[w.active[j]]
        active_ties(w, n_active)
        gaps_into(w.means, w.tie, n_active, m_left, w.order, w.gaps)
        inside = w.means[w.order[m_left]]
        best = 0
        for j in range(1, n_active):
            if before(w.gaps, w.tie, j, best):
                best = j
        if w.means[best] > inside:
            row[w.active[best]] = 1
            m_left -= 1
        remove_at(w.active, n_active, best)
        n_active -= 1
    if m_left == n_active:
        for j in range(n_active):
            row[w.active[j]] = 1


cdef void run_sr(Work* w, Rng* r, const int8_t* kinds, const double* params, int K, int m,
                 const int64_t* n_k, uint8_t* row) noexcept nogil:
    cdef int n_active = K, k, j, worst
    cdef int64_t prev = 0
    for k in range(K - m):
        pull_phase(w, r, kinds, params, n_active, n_k[k] - prev)
        prev = n_k[k]
        for j in range(n_active):
            w.means[j] = w.sums[w.active[j]] / <double>w.counts[w.active[j]]
        active_ties(w, n_active)
        worst = 0
        for j in range(1, n_active):
            if (w.means[j] < w.means[worst]
                    or (w.means[j] == w.means[worst] and w.tie[j] < w.tie[worst])):
                worst = j
        remove_at(w.active, n_active, worst)
        n_active -= 1
    for j in range(n_active):
        row[w.active[j]] = 1


cdef void run_uniform(Work* w, Rng* r, const int8_t* kinds, const double* params, int K, int m,
                      int64_t n, uint8_t* row) noexcept nogil:
    cdef int64_t base = n // K, extra = n % K, s, cnt
    cdef int a
    for a in range(K):
        cnt = base + (1 if a < extra else 0)
        for s in range(cnt):
            w.sums[a] += draw(r, kinds[a], params[a])
        w.counts[a] = cnt
        w.means[a] = w.sums[a] / <double>cnt
    mark_top(w.means, w.rank, K, m, w.order, row)


cdef inline void reposition(const double* v, const int* tie, int K, int* order, int* pos,
                            int a) noexcept nogil:
    # restore the (decreasing value, increasing tie rank) order after v[a] changed
    cdef int p = pos[a]
    while p > 0 and before(v, tie, a, order[p - 1]):
        order[p] = order[p - 1]
        pos[order[p]] = p
        p -= 1
    while p < K - 1 and before(v, tie, order[p + 1], a):
        order[p] = order[p + 1]
        pos[order[p]] = p
        p += 1
    order[p] = a
    pos[a] = p


cdef void run_gap_e(Work* w, Rng* r, const int8_t* kinds, const double* params, int K, int m,
                    int64_t n, double c, double h1, uint8_t* row) noexcept nogil:
    cdef double scale = <double>n / h1
    cdef double inside, outside, idx, best_idx, gap
    cdef int64_t t
    cdef int a, i, best
    for a in range(K):
        w.sums[a] += draw(r, kinds[a], params[a])
        w.counts[a] = 1
        w.means[a] = w.sums[a]
    rank_desc(w.means, w.rank, K, w.order)
    for i in range(K):
        w.pos[w.order[i]] = i
    for t in range(K, n):
        inside = w.means[w.order[m]]
        outside = w.means[w.order[m - 1]]
        best = -1
        best_idx = 0.0
        for i in range(K):
            if w.pos[i] < m:
                gap = w.means[i] - inside
            else:
                gap = outside - w.means[i]
            idx = -gap + c * sqrt(scale / <double>w.counts[i])
            if best < 0 or idx > best_idx or (idx == best_idx and w.rank[i] < w.rank[best]):
                best = i
                best_idx = idx
        w.sums[best] += draw(r, kinds[best], params[best])
        w.counts[best] += 1
        w.means[best] = w.sums[best] / <double>w.counts[best]
        reposition(w.means, w.rank, K, w.order, w.pos, best)
    for i in range(m):
        row[w.order[i]] = 1


def run_trials(int code, int8_t[::1] kinds, double[::1] params, int m, int64_t n,
               int64_t[::1] schedule, double c, double h1, uint64_t master_seed,
               int64_t first_trial, int64_t count, bint random_ties=False):
    """Run ``count`` trials; return a ``(count, K)`` uint8 selection mask."""
    cdef int K = kinds.shape[0]
    cdef Py_ssize_t t
    cdef Rng rng
    cdef Work w
    cdef const int64_t* nk = &schedule[0]
    out_arr = np.zeros((count, K), dtype=np.uint8)
    cdef uint8_t[:, ::1] out = out_arr
    if count == 0:
        return out_arr
    if work_alloc(&w, K) != 0:
        work_free(&w)
        raise MemoryError()
    with nogil:
        for t in range(count):
            rng_seed(&rng, master_seed, <uint64_t>(first_trial + t))
            reset(&w, &rng, K, random_ties)
            if code == SAR:
                run_sar(&w, &rng, &kinds[0], &params[0], K, m, nk, &out[t, 0])
            elif code == SR:
                run_sr(&w, &rng, &kinds[0], &params[0], K, m, nk, &out[t, 0])
            elif code == UNIFORM:
                run_uniform(&w, &rng, &kinds[0], &params[0], K, m, n, &out[t, 0])
            else:
                run_gap_e(&w, &rng, &kinds[0], &params[0], K, m, n, c, h1, &out[t, 0])
    work_free(&w)
    return out_arr


cdef void run_multi(Work* w, Rng* r, const int8_t* kinds, const double* params, int M, int K,
                    const int64_t* n_k, int32_t* row, int* leader, int* size) noexcept nogil:
    cdef int F = M * K, n_active = F, k, j, f, p, single, worst
    cdef int64_t prev = 0
    cdef double gap, best_gap
    for k in range(F - 1):
        pull_phase(w, r, kinds, params, n_active, n_k[k] - prev)
        prev = n_k[k]
        for p in range(M):
            leader[p] = -1
            size[p] = 0
        for j in range(n_active):
            f = w.active[j]
            w.means[f] = w.sums[f] / <double>w.counts[f]
            p = f // K
            size[p] += 1
            if leader[p] < 0 or before(w.means, w.rank, f, leader[p]):
                leader[p] = f
        single = -1
        for p in range(M):
            if size[p] == 1:
                single = p
                break
        if single >= 0:
            f = leader[single]
            row[single] = f - single * K + 1
            for j in range(n_active):
                if w.active[j] == f:
                    remove_at(w.active, n_active, j)
                    break
            n_active -= 1
            continue
        worst = -1
        best_gap = -1.0
        for j in range(n_active):
            f = w.active[j]
            gap = w.means[leader[f // K]] - w.means[f]
            if worst < 0 or gap > best_gap or (gap == best_gap and w.rank[f] < w.rank[w.active[worst]]):
                best_gap = gap
                worst = j
        remove_at(w.active, n_active, worst)
        n_active -= 1
    f = w.active[0]
    row[f // K] = f % K + 1


def run_trials_multi(int8_t[::1] kinds, double[::1] params, int M, int K, int64_t n,
                     int64_t[::1] schedule, uint64_t master_seed,
                     int64_t first_trial, int64_t count, bint random_ties=False):
    """Run ``count`` multi-bandit SAR trials; return ``(count, M)`` 1-based choices."""
    cdef int F = M * K
    cdef Py_ssize_t t
    cdef Rng rng
    cdef Work w
    out_arr = np.zeros((count, M), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    if count == 0:
        return out_arr
    cdef int status = work_alloc(&w, F)
    cdef int* leader = <int*>malloc(M * sizeof(int))
    cdef int* size = <int*>malloc(M * sizeof(int))
    if status != 0 or leader == NULL or size == NULL:
        free(leader)
        free(size)
        work_free(&w)
        raise MemoryError()
    with nogil:
        for t in range(count):
            rng_seed(&rng, master_seed, <uint64_t>(first_trial + t))
            reset(&w, &rng, F, random_ties)
            run_multi(&w, &rng, &kinds[0], &params[0], M, K, &schedule[0], &out[t, 0],
                      leader, size)
    free(leader)
    free(size)
    work_free(&w)
    return out_arr
