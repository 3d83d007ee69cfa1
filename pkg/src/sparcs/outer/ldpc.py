"""Binary LDPC codes: alist I/O, systematic encoding and normalized min-sum decoding."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

LLR_CLAMP = 30.0


def _as_csr(H) -> sp.csr_matrix:
    if isinstance(H, LdpcCode):
        return H.H
    H = sp.csr_matrix(H, dtype=np.uint8)
    H.sum_duplicates()
    H.eliminate_zeros()
    if H.data.size and H.data.max() > 1:
        raise ValueError("parity-check matrix must be binary")
    return H


def parse_alist(text: str) -> sp.csr_matrix:
    """Parse the alist adjacency format into a sparse (checks x variables) matrix.

    Both the column and the row lists are read; zero padding is ignored and
    the two views must agree.
    """
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        col_w = [int(v) for v in lines[2]]
        row_w = [int(v) for v in lines[3]]
        col_lists = [[int(v) for v in ln if int(v) > 0] for ln in lines[4: 4 + n]]
        row_lists = [[int(v) for v in ln if int(v) > 0] for ln in lines[4 + n: 4 + n + m]]
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed alist: {exc}") from None
    if len(col_w) != n or len(row_w) != m or len(col_lists) != n or len(row_lists) != m:
        raise ValueError("malformed alist: list lengths do not match the header")
    rows, cols = [], []
    for j, lst in enumerate(col_lists):
        if len(lst) != col_w[j]:
            raise ValueError(f"malformed alist: column {j + 1} weight mismatch")
        for i in lst:
            if not 1 <= i <= m:
                raise ValueError(f"malformed alist: check index {i} out of range")
            rows.append(i - 1)
            cols.append(j)
    H = sp.csr_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=(m, n))
    if H.data.size and H.data.max() > 1:
        raise ValueError("malformed alist: repeated entry")
    for i, lst in enumerate(row_lists):
        if len(lst) != row_w[i] or sorted(lst) != (H.indices[H.indptr[i]:H.indptr[i + 1]] + 1).tolist():
            raise ValueError(f"malformed alist: row {i + 1} disagrees with the column lists")
    return H


def read_alist(path: str | os.PathLike) -> sp.csr_matrix:
    with open(path) as fh:
        return parse_alist(fh.read())


def format_alist(H) -> str:
    H = _as_csr(H)
    m, n = H.shape
    Hc = H.tocsc()
    Hc.sort_indices()
    cols = [(Hc.indices[Hc.indptr[j]:Hc.indptr[j + 1]] + 1).tolist() for j in range(n)]
    rows = [(H.indices[H.indptr[i]:H.indptr[i + 1]] + 1).tolist() for i in range(m)]
    out = [f"{n} {m}",
           f"{max(map(len, cols), default=0)} {max(map(len, rows), default=0)}",
           " ".join(str(len(c)) for c in cols),
           " ".join(str(len(r)) for r in rows)]
    out += [" ".join(map(str, c)) for c in cols]
    out += [" ".join(map(str, r)) for r in rows]
    return "\n".join(out) + "\n"


def write_alist(H, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(format_alist(H))


def _gf2_reduce(H: np.ndarray):
    """Gauss-Jordan elimination over GF(2), choosing pivots from the last column backwards.

    Returns the reduced matrix (pivot rows only) and the pivot column of each row.
    """
    R = H.astype(bool)
    m, n = R.shape
    pivots = []
    r = 0
    for j in range(n - 1, -1, -1):
        if r == m:
            break
        cand = np.flatnonzero(R[r:, j])
        if cand.size == 0:
            continue
        p = r + cand[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        hit = np.flatnonzero(R[:, j])
        hit = hit[hit != r]
        R[hit] ^= R[r]
        pivots.append(j)
        r += 1
    return R[:r], np.array(pivots, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """An LDPC code in systematic column order.

    ``H`` is the parity-check matrix with columns already permuted so that
    the first ``k`` codeword bits are the information bits; ``perm`` maps
    those columns back to the source matrix (``H = H_source[:, perm]``).
    """

    H: sp.csr_matrix
    perm: np.ndarray
    parity_map: np.ndarray  # (n-k) x k over GF(2): parity = parity_map @ info

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return self.n - self.H.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_matrix(cls, H) -> "LdpcCode":
        H = _as_csr(H)
        m, n = H.shape
        if m >= n:
            raise ValueError("parity-check matrix needs fewer rows than columns")
        if np.any(np.diff(H.tocsc().indptr) == 0):
            raise ValueError("parity-check matrix has an empty column")
        R, pivots = _gf2_reduce(H.toarray())
        if pivots.size < m:
            raise ValueError(f"parity-check matrix is rank deficient (rank {pivots.size} < {m})")
        info = np.setdiff1d(np.arange(n), pivots)
        order = np.argsort(pivots)
        perm = np.concatenate([info, pivots[order]])
        parity_map = R[order][:, info].astype(np.uint8)
        Hp = H[:, perm].tocsr()
        Hp.sort_indices()
        perm.setflags(write=False)
        parity_map.setflags(write=False)
        return cls(Hp, perm, parity_map)

    @classmethod
    def from_alist(cls, path) -> "LdpcCode":
        return cls.from_matrix(read_alist(path))

    def syndrome(self, bits) -> np.ndarray:
        return syndrome(self.H, bits)

    def encode(self, info_bits) -> np.ndarray:
        return ldpc_encode(self, info_bits)


def syndrome(H, bits) -> np.ndarray:
    H = _as_csr(H)
    bits = np.asarray(bits, dtype=np.int64)
    return (H @ bits) % 2


def ldpc_encode(code: LdpcCode, info_bits) -> np.ndarray:
    """Systematic codeword: the ``k`` information bits followed by ``n-k`` parity bits."""
    u = np.asarray(info_bits)
    if u.shape != (code.k,):
        raise ValueError(f"expected {code.k} information bits, got shape {u.shape}")
    u = u.astype(np.uint8)
    if np.any(u > 1):
        raise ValueError("bits must be 0 or 1")
    parity = (code.parity_map.astype(np.int64) @ u) % 2
    return np.concatenate([u, parity.astype(np.uint8)])


def llrs_from_probabilities(p1) -> np.ndarray:
    """ln(P(bit=0)/P(bit=1)) from P(bit=1), clamped to +-30."""
    p1 = np.asarray(p1, dtype=float)
    with np.errstate(divide="ignore"):
        llr = np.log1p(-p1) - np.log(p1)
    return np.clip(np.nan_to_num(llr, nan=0.0), -LLR_CLAMP, LLR_CLAMP)


def minsum_decode(H, llrs, max_iters: int = 50, scale: float = 0.75):
    """Normalized min-sum decoding with a flooding schedule.

    Positive LLRs favour bit 0. Returns ``(bits, valid)``; decoding stops at
    the first hard decision that satisfies every check.
    """
    H = _as_csr(H)
    m, n = H.shape
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (n,):
        raise ValueError(f"expected {n} LLRs, got shape {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")

    bits = (llrs < 0).astype(np.uint8)
    if not np.any(syndrome(H, bits)):
        return bits, True
    # edges are laid out check by check (CSR order)
    var = H.indices.astype(np.int64)
    starts = H.indptr[:-1]
    nonempty = np.diff(H.indptr) > 0
    starts = starts[nonempty]
    chk_of_edge = np.repeat(np.arange(m), np.diff(H.indptr))
    c2v = np.zeros(var.size)
    for _ in range(max_iters):
        total = llrs + np.bincount(var, weights=c2v, minlength=n)
        v2c = total[var] - c2v
        mag = np.abs(v2c)
        neg = v2c < 0
        min1 = np.minimum.reduceat(mag, starts)
        arg1 = _argmin_per_segment(mag, starts, min1, chk_of_edge, nonempty)
        mag2 = mag.copy()
        mag2[arg1] = np.inf
        min2 = np.minimum.reduceat(mag2, starts)
        parity = np.add.reduceat(neg.astype(np.int64), starts) % 2
        full_min1 = np.zeros(m)
        full_min2 = np.zeros(m)
        full_par = np.zeros(m, dtype=np.int64)
        full_min1[nonempty], full_min2[nonempty], full_par[nonempty] = min1, min2, parity
        is_min = np.zeros(var.size, dtype=bool)
        is_min[arg1] = True
        other = np.where(is_min, full_min2[chk_of_edge], full_min1[chk_of_edge])
        other[~np.isfinite(other)] = 0.0  # degree-one check
        sign = 1 - 2 * (full_par[chk_of_edge] ^ neg)
        c2v = scale * sign * other
        total = llrs + np.bincount(var, weights=c2v, minlength=n)
        bits = (total < 0).astype(np.uint8)
        if not np.any(syndrome(H, bits)):
            return bits, True
    return bits, False


def _argmin_per_segment(mag, starts, seg_min, chk_of_edge, nonempty):
    """Edge index of the first minimum within each check's segment."""
    full_min = np.full(nonempty.size, np.inf)
    full_min[nonempty] = seg_min
    hits = np.flatnonzero(mag == full_min[chk_of_edge])
    first = np.unique(chk_of_edge[hits], return_index=True)[1]
    return hits[first]


def make_ldpc_code(n: int, k: int, col_weight: int = 3, seed: int = 0,
                   max_attempts: int = 1000) -> LdpcCode:
    """Random full-rank parity-check matrix with columns of weight ``col_weight``.

    Row degrees are kept as even as possible and columns are distinct, so the
    minimum distance is at least 3.
    """
    m = n - k
    if not 1 <= k < n or not 1 <= col_weight <= m:
        raise ValueError("need 1 <= k < n and 1 <= col_weight <= n - k")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        deg = np.zeros(m, dtype=np.int64)
        cols = []
        for _j in range(n):
            # lightest rows first, random tie-breaking
            order = np.lexsort((rng.random(m), deg))
            rows = np.sort(order[:col_weight])
            deg[rows] += 1
            cols.append(rows)
        if len({tuple(c) for c in cols}) < n:
            continue
        r = np.concatenate(cols)
        c = np.repeat(np.arange(n), col_weight)
        H = sp.csr_matrix((np.ones(r.size, dtype=np.uint8), (r, c)), shape=(m, n))
        try:
            return LdpcCode.from_matrix(H)
        except ValueError:
            continue
    raise RuntimeError("could not generate a full-rank parity-check matrix")
