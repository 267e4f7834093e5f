"""Spectral blocks of the linearized operator at a balanced bubble ring.

Testing the second variation against the approximate kernel fields
Z_j^0 (rate), Z_j^1 (normal), Z_j^2 (tangential) and Z_j^alpha
(out-of-plane, alpha = 3..n) produces k x k circulant blocks.  The
entries used here are the closed-form leading terms of those pairings;
diagonals of the tangential / out-of-plane blocks are fixed by the exact
row-sum identities that encode the rotation kernel (rotating the whole
ring costs nothing, so certain weighted row sums must vanish exactly).

Everything diagonalizes in the common DFT basis, so the 3k x 3k bulk
reduces to a 3 x 3 problem per frequency nu, whose determinant
det_hat(nu) drives the non-degeneracy argument: it vanishes only at
nu = 0 and scales like -mu^{-3m-2} nu^2 at low frequency.
"""

from dataclasses import dataclass

import numpy as np

from . import specfun
from .bubbles import GammaConstants, gamma_oracle, zeta_constant
from .circulant import Circulant, eigen_dft
from .model import DerivedScales, ProblemParams, ring_angles


@dataclass(frozen=True)
class NondegenBlocks:
    """The circulant blocks, plus the scalars the entries were built from."""

    A: Circulant          # rate-rate
    B: Circulant          # rate-normal
    C: Circulant          # rate-tangential (antisymmetric)
    F: Circulant          # normal-normal
    E: Circulant          # normal-tangential (antisymmetric)
    G: Circulant          # tangential-tangential
    H: tuple              # out-of-plane blocks, one per alpha = 3..n (identical)
    zeta: float
    params: ProblemParams
    scales: DerivedScales
    r: float
    Lambda0: float

    @property
    def k(self) -> int:
        return self.A.k


def build_blocks(params: ProblemParams, scales: DerivedScales, r: float,
                 Lambda0: float, offset: float | None = None,
                 gammas: GammaConstants | None = None) -> NondegenBlocks:
    """Assemble the blocks at a ring solution (r, Lambda0).

    `offset` is r - mu r0; pass it explicitly when available since
    recovering it from r loses most of its digits (r is ~ mu while the
    offset is ~ mu^{1-...}, far below the float resolution of r).
    """
    n, m, k = params.n, params.m, params.k
    c0, mu = params.c0, scales.mu
    gam = gammas if gammas is not None else gamma_oracle(n, m)
    L = Lambda0
    if offset is None:
        offset = r - mu * params.r0

    theta = ring_angles(k)[1:]                 # 2 pi l / k, l = 1..k-1
    s = np.sin(theta / 2.0)                    # half-angle sines
    zeta = zeta_constant(n, m, c0)

    inter0 = gam.gamma1 * L ** (-float(n)) * (2.0 * r) ** (2.0 - n)
    inter1 = gam.gamma1 * L ** (1.0 - n) * (2.0 * r) ** (1.0 - n)
    inter2 = gam.gamma1 * L ** (2.0 - n) * (2.0 * r) ** (-float(n))

    a_row = np.empty(k)
    a_row[0] = 0.5 * (n - m - 2.0) * gam.gamma3 * L ** (-m - 2.0) * c0 * mu ** (-m)
    a_row[1:] = 0.25 * (n - 2.0) * inter0 * s ** (2.0 - n)

    b_row = np.empty(k)
    b_row[0] = (-(m - 2.0) * c0 * mu ** (-m) * offset * gam.gamma2 * L ** (1.0 - m)
                - (m * c0 * mu ** (-m) / r) * gam.gamma4 * L ** (-1.0 - m)
                + 0.5 * (n - 2.0) * inter1 * np.sum(s ** (2.0 - n)))
    b_row[1:] = -0.25 * (n - 2.0) * inter1 * s ** (2.0 - n)

    c_row = np.empty(k)
    c_row[1:] = -0.25 * (n - 2.0) * inter1 * np.sin(theta) * s ** (-float(n))
    c_row[0] = 0.0                             # plain row sum vanishes already

    f_row = np.empty(k)
    f_row[0] = mu ** (-m) * zeta
    f_row[1:] = inter2 * (s ** (-float(n)) + (n - 2.0) * s ** (2.0 - n))

    e_row = np.empty(k)
    e_row[1:] = 0.5 * (n - 2.0) * inter2 * np.sin(theta) * s ** (-float(n))
    e_row[0] = 0.0

    g_row = np.empty(k)
    g_row[1:] = inter2 * ((1.0 - n) * s ** (-float(n)) + (n - 2.0) * s ** (2.0 - n))
    g_row[0] = -np.sum(g_row[1:])              # rotation kernel: row sum = 0

    h_row = np.empty(k)
    h_row[1:] = 2.0 * inter2 * s ** (-float(n))
    # the out-of-plane kernel identities are cos/sin-weighted row sums
    h_row[0] = -np.sum(np.cos(theta) * h_row[1:])

    H = tuple(Circulant(h_row.copy()) for _ in range(3, n + 1))
    return NondegenBlocks(A=Circulant(a_row), B=Circulant(b_row),
                          C=Circulant(c_row), F=Circulant(f_row),
                          E=Circulant(e_row), G=Circulant(g_row), H=H,
                          zeta=zeta, params=params, scales=scales,
                          r=r, Lambda0=L)


def dense_M1(blocks: NondegenBlocks) -> np.ndarray:
    """The assembled 3k x 3k in-plane matrix [[A,B,C],[B^T,F,E],[C^T,E^T,G]]."""
    A, B, C = blocks.A.dense(), blocks.B.dense(), blocks.C.dense()
    F, E, G = blocks.F.dense(), blocks.E.dense(), blocks.G.dense()
    return np.block([[A, B, C], [B.T, F, E], [C.T, E.T, G]])


@dataclass(frozen=True)
class FrequencyTriple:
    """One DFT frequency of the in-plane blocks.

    c and e are stored as the imaginary parts of the (purely imaginary)
    antisymmetric-block eigenvalues.
    """

    nu: int
    a: float
    b: float
    c_imag: float
    f: float
    e_imag: float
    g_eig: float
    det_hat: float


def _spectra(blocks: NondegenBlocks):
    return (eigen_dft(blocks.A).real, eigen_dft(blocks.B).real,
            eigen_dft(blocks.C).imag, eigen_dft(blocks.F).real,
            eigen_dft(blocks.E).imag, eigen_dft(blocks.G).real)


def det3_hat_values(a, b, ci, f, ei, g):
    """det [[a, b, i ci], [b, f, i ei], [-i ci, -i ei, g]], which is real."""
    return a * f * g - a * ei**2 - b**2 * g + 2.0 * b * ci * ei - f * ci**2


def eigen_blocks(blocks: NondegenBlocks) -> list:
    """DFT spectra of all in-plane blocks, one FrequencyTriple per nu."""
    a, b, ci, f, ei, g = _spectra(blocks)
    dets = det3_hat_values(a, b, ci, f, ei, g)
    return [FrequencyTriple(nu=int(nu), a=float(a[nu]), b=float(b[nu]),
                            c_imag=float(ci[nu]), f=float(f[nu]),
                            e_imag=float(ei[nu]), g_eig=float(g[nu]),
                            det_hat=float(dets[nu]))
            for nu in range(blocks.k)]


def det3_hat(blocks: NondegenBlocks, nu: int) -> float:
    """Determinant of the 3 x 3 frequency block at nu (zero exactly at nu=0)."""
    a, b, ci, f, ei, g = _spectra(blocks)
    return float(det3_hat_values(a[nu], b[nu], ci[nu], f[nu], ei[nu], g[nu]))


def det_hat_scaled(blocks: NondegenBlocks) -> np.ndarray:
    """-det_hat(nu) / (mu^{-3m-2} nu_eff^2) for nu = 1..k-1.

    nu_eff = min(nu, k - nu): the spectrum is symmetric under
    nu -> k - nu, so the quadratic growth is in the distance to the
    nearest zero mode, not in the raw index.
    """
    k, m = blocks.k, blocks.params.m
    a, b, ci, f, ei, g = _spectra(blocks)
    dets = det3_hat_values(a, b, ci, f, ei, g)[1:]
    nu = np.arange(1, k)
    nu_eff = np.minimum(nu, k - nu)
    return -dets / (blocks.scales.mu ** (-3.0 * m - 2.0) * nu_eff**2.0)


def inverse_block(blocks: NondegenBlocks, nu: int) -> np.ndarray:
    """Inverse of the 3 x 3 frequency block (complex), nu != 0."""
    a, b, ci, f, ei, g = _spectra(blocks)
    M = np.array([[a[nu], b[nu], 1j * ci[nu]],
                  [b[nu], f[nu], 1j * ei[nu]],
                  [-1j * ci[nu], -1j * ei[nu], g[nu]]])
    return np.linalg.inv(M)


def h_eigenvalues(blocks: NondegenBlocks) -> np.ndarray:
    """Spectrum of one out-of-plane block (all alpha share it)."""
    return eigen_dft(blocks.H[0]).real


def _equilibration(blocks: NondegenBlocks) -> np.ndarray:
    """Per-kernel-index scalings that bring the three blocks to size ~1.

    The raw blocks differ by many powers of mu, which wrecks the dense
    eigensolver's small eigenvalues; a symmetric diagonal rescaling fixes
    the conditioning without moving the kernel.
    """
    a, _, _, f, _, g = _spectra(blocks)
    return 1.0 / np.sqrt([np.max(np.abs(a)), np.max(np.abs(f)),
                          np.max(np.abs(g))])


def frequency_pseudo_logdet(blocks: NondegenBlocks,
                            scale: np.ndarray | None = None) -> float:
    """log |pseudo-det| of the in-plane matrix via per-frequency products.

    The nu = 0 block is singular in exactly one direction (the rotation),
    so it contributes its 2 x 2 rate/normal minor a0 f0 - b0^2; every
    other frequency contributes its full 3 x 3 determinant.  `scale`
    applies the symmetric per-block rescaling (diag(s) M diag(s) at each
    frequency); use the same scale on the dense side for comparison.
    """
    a, b, ci, f, ei, g = _spectra(blocks)
    if scale is not None:
        s0, s1, s2 = scale
        a, b, ci = a * s0 * s0, b * s0 * s1, ci * s0 * s2
        f, ei, g = f * s1 * s1, ei * s1 * s2, g * s2 * s2
    dets = det3_hat_values(a, b, ci, f, ei, g)
    out = np.log(abs(a[0] * f[0] - b[0] ** 2))
    out += float(np.sum(np.log(np.abs(dets[1:]))))
    return float(out)


def dense_pseudo_logdet(mat: np.ndarray, drop: int = 1) -> float:
    """log |product of eigenvalues| after dropping the `drop` smallest.

    The dropped ones are the (numerically tiny) kernel directions; for
    the in-plane matrix that is the single rotation mode, for an
    out-of-plane block the two modes nu = 1, k-1.
    """
    w = np.linalg.eigvalsh(mat)
    w = w[np.argsort(np.abs(w))][drop:]
    return float(np.sum(np.log(np.abs(w))))


def logdet_comparison(blocks: NondegenBlocks) -> tuple[float, float]:
    """(frequency-product, dense) pseudo-logdets on equal footing.

    Both sides are computed for the equilibrated matrix D M D, D built by
    _equilibration, so the dense eigensolver sees an O(1) matrix and the
    two numbers are directly comparable.
    """
    s = _equilibration(blocks)
    freq = frequency_pseudo_logdet(blocks, scale=s)
    k = blocks.k
    D = np.repeat(s, k)
    dense = dense_pseudo_logdet(D[:, None] * dense_M1(blocks) * D[None, :])
    return freq, dense


def eigen_asym_series(blocks: NondegenBlocks, nu: int,
                      tol: float = 1e-12) -> dict:
    """Large-k predictions for the lattice-sum parts of the spectra.

    These are the eigenvalues with the diagonal entry removed; the sums
    converge to the series g, g', g'' at x = 2 pi nu_eff / k with
    relative error O(k^-2 log k).  Kept separate from the diagonal
    because the diagonal can exceed the sum by more than the float
    precision (notably the normal-normal block).  The sign of the odd
    (imaginary) entries flips for nu > k/2.
    """
    p = blocks.params
    n, k = p.n, blocks.k
    L, r = blocks.Lambda0, blocks.r
    gam = gamma_oracle(n, p.m)
    nu_eff = min(nu, k - nu)
    sign = 1.0 if nu <= k // 2 else -1.0
    x = 2.0 * np.pi * nu_eff / k
    kp = k / np.pi
    gv = specfun.eval_g(x, n, tol).value if nu_eff else 0.0
    g1v = specfun.eval_g1(x, n, tol).value if nu_eff else 0.0
    g2v = specfun.eval_g2(x, n, tol).value if nu_eff else specfun.g2_at_zero(n)
    g_small = specfun.eval_g(2.0 * np.pi / k, n, tol).value

    inter0 = gam.gamma1 * L ** (-float(n)) * (2.0 * r) ** (2.0 - n)
    inter1 = gam.gamma1 * L ** (1.0 - n) * (2.0 * r) ** (1.0 - n)
    inter2 = gam.gamma1 * L ** (2.0 - n) * (2.0 * r) ** (-float(n))
    zn = specfun.g_at_pi(n) / (2.0 * (1.0 - 2.0 ** (-float(n))))  # zeta(n)
    return {
        "a": 0.5 * (n - 2.0) * inter0 * kp ** (n - 2.0) * g2v,
        "b": -0.5 * (n - 2.0) * inter1 * kp ** (n - 2.0) * g2v,
        "c_imag": -sign * (n - 2.0) * inter1 * kp ** (n - 1.0) * g1v,
        "f": 2.0 * inter2 * kp ** float(n) * (zn - gv),
        "e_imag": sign * 2.0 * (n - 2.0) * inter2 * kp ** (n - 1.0) * g1v,
        "g_eig": 2.0 * (n - 1.0) * inter2 * kp ** float(n) * gv
                 - blocks.G.row[0],
        "h": 4.0 * inter2 * kp ** float(n) * (g_small - gv)
             - blocks.H[0].row[0],
    }


def eigen_series_exact(blocks: NondegenBlocks, nu: int) -> dict:
    """Exact lattice-sum parts of the spectra (diagonal entry removed)."""
    out = {}
    for key, block in (("a", blocks.A), ("b", blocks.B), ("c_imag", blocks.C),
                       ("f", blocks.F), ("e_imag", blocks.E),
                       ("g_eig", blocks.G), ("h", blocks.H[0])):
        row = block.row.copy()
        row[0] = 0.0
        lam = eigen_dft(Circulant(row))[nu]
        out[key] = float(lam.imag if key in ("c_imag", "e_imag") else lam.real)
    return out


def eigen_asym(blocks: NondegenBlocks, nu: int, tol: float = 1e-12) -> dict:
    """Full eigenvalue predictions: diagonal entry plus the series part."""
    series = eigen_asym_series(blocks, nu, tol)
    diag = {"a": blocks.A.row[0], "b": blocks.B.row[0], "c_imag": 0.0,
            "f": blocks.F.row[0], "e_imag": 0.0,
            "g_eig": blocks.G.row[0], "h": blocks.H[0].row[0]}
    return {key: diag[key] + series[key] for key in series}


def kernel_decomposition_weights(k: int, n: int) -> list:
    """Weight vectors writing each rotation field in the kernel basis.

    Each rotation generator z_alpha is a weighted sum of single-bubble
    kernels over the ring: cosine weights on an out-of-plane block for
    alpha <= n-2, sine weights for n-1 <= alpha <= 2n-4, and the
    all-ones vector on the tangential block for alpha = 2n-3.  The DFT
    support of these vectors ({1, k-1} for cos/sin, {0} for ones) is
    where the corresponding block spectra vanish.
    """
    theta = ring_angles(k)
    table = []
    for alpha in range(1, 2 * n - 2):
        if alpha <= n - 2:
            table.append({"alpha": alpha, "block": alpha + 2,
                          "weights": np.cos(theta)})
        elif alpha <= 2 * n - 4:
            table.append({"alpha": alpha, "block": alpha - n + 4,
                          "weights": np.sin(theta)})
        else:
            table.append({"alpha": alpha, "block": 2,
                          "weights": np.ones(k)})
    return table
