"""The 24 named single-objective benchmark functions.

Each function applies its canonical formula to a shifted (and, where the
landscape is rotation-sensitive, rotated) copy of the input. The shift
vector and rotation matrix are seeded deterministically from
``(name, instance, dim)``, so an instance is fully reproducible from its
manifest entry. Evaluation is vectorized: ``x`` may be one point ``(dim,)``
or a batch ``(n, dim)``.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache

import numpy as np

from ..errors import DimMismatch, UnknownFunction

# Function name -> (BBOB-style id, uses a rotation matrix).
_CATALOG: dict[str, tuple[str, bool]] = {
    "Sphere": ("F1", False),
    "Ellipsoidal": ("F2", False),
    "Rastrigin": ("F3", False),
    "Buche_Rastrigin": ("F4", False),
    "Linear_Slope": ("F5", False),
    "Attractive_Sector": ("F6", True),
    "Step_Ellipsoidal": ("F7", True),
    "Rosenbrock_original": ("F8", False),
    "Rosenbrock_rotated": ("F9", True),
    "Ellipsoidal_high_cond": ("F10", True),
    "Discus": ("F11", True),
    "Bent_Cigar": ("F12", True),
    "Sharp_Ridge": ("F13", True),
    "Different_Powers": ("F14", True),
    "Rastrigin_F15": ("F15", True),
    "Weierstrass": ("F16", True),
    "Schaffers": ("F17", True),
    "Schaffers_high_cond": ("F18", True),
    "Composite_Grie_rosen": ("F19", True),
    "Schwefel": ("F20", False),
    "Gallagher_101Peaks": ("F21", False),
    "Gallagher_21Peaks": ("F22", False),
    "Katsuura": ("F23", True),
    "Lunacek_bi_Rastrigin": ("F24", True),
}

FUNCTION_NAMES = tuple(_CATALOG)

UNIMODAL_FUNCTIONS = (
    "Sphere",
    "Ellipsoidal",
    "Bent_Cigar",
    "Discus",
    "Sharp_Ridge",
    "Different_Powers",
)


def function_id(name: str) -> str:
    try:
        return _CATALOG[name][0]
    except KeyError:
        raise UnknownFunction(name) from None


def _instance_seed(name: str, instance: int, dim: int) -> int:
    digest = hashlib.sha256(f"{name}|{instance}|{dim}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@lru_cache(maxsize=4096)
def _instance_parts(name: str, instance: int, dim: int):
    """Seeded shift vector and, when needed, orthogonal rotation."""
    if name not in _CATALOG:
        raise UnknownFunction(name)
    rng = np.random.default_rng(_instance_seed(name, instance, dim))
    shift = rng.uniform(-4.0, 4.0, size=dim)
    rotation = None
    if _CATALOG[name][1]:
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        rotation = q * np.sign(np.diag(r))
    return shift, rotation


def shift_vector(name: str, instance: int, dim: int) -> np.ndarray:
    """The instance's optimum-defining shift (copy)."""
    return _instance_parts(name, instance, dim)[0].copy()


def _axis_scale(dim: int, exponent: float) -> np.ndarray:
    if dim == 1:
        return np.ones(1)
    return 10.0 ** (exponent * np.arange(dim) / (dim - 1))


def _f_sphere(z, rng):
    return (z**2).sum(axis=1)


def _f_ellipsoidal(z, rng):
    return (_axis_scale(z.shape[1], 6.0) * z**2).sum(axis=1)


def _f_rastrigin(z, rng):
    d = z.shape[1]
    return 10.0 * (d - np.cos(2 * np.pi * z).sum(axis=1)) + (z**2).sum(axis=1)


def _f_buche_rastrigin(z, rng):
    d = z.shape[1]
    s = _axis_scale(d, 0.5)
    odd_boost = np.where((np.arange(d) % 2 == 0) & (z > 0), 10.0, 1.0)
    zz = s * odd_boost * z
    return 10.0 * (d - np.cos(2 * np.pi * zz).sum(axis=1)) + (zz**2).sum(axis=1)


def _f_linear_slope(z, rng, shift):
    # Linear inside the box; the optimum sits on the [-5, 5] vertex whose
    # signs follow the shift. z here is the raw x (no shift subtraction).
    sgn = np.where(shift >= 0, 1.0, -1.0)
    s = sgn * _axis_scale(z.shape[1], 1.0)
    zz = np.where(z * sgn < 5.0, z, 5.0 * sgn)
    return (5.0 * np.abs(s) - s * zz).sum(axis=1)


def _f_attractive_sector(z, rng, shift_dir):
    s = np.where(z * shift_dir > 0, 100.0, 1.0)
    return ((s * z) ** 2).sum(axis=1) ** 0.9


def _f_step_ellipsoidal(z, rng):
    zt = np.where(np.abs(z) > 0.5, np.round(z), np.round(10 * z) / 10.0)
    core = (_axis_scale(z.shape[1], 2.0) * zt**2).sum(axis=1)
    return 0.1 * np.maximum(np.abs(z[:, 0]) / 1e4, core)


def _f_rosenbrock(z, rng):
    d = z.shape[1]
    zz = max(1.0, np.sqrt(d) / 8.0) * z + 1.0
    if d == 1:
        return (zz[:, 0] - 1.0) ** 2
    return (
        100.0 * (zz[:, :-1] ** 2 - zz[:, 1:]) ** 2 + (zz[:, :-1] - 1.0) ** 2
    ).sum(axis=1)


def _f_ellipsoidal_high_cond(z, rng):
    return (_axis_scale(z.shape[1], 6.0) * z**2).sum(axis=1)


def _f_discus(z, rng):
    return 1e6 * z[:, 0] ** 2 + (z[:, 1:] ** 2).sum(axis=1)


def _f_bent_cigar(z, rng):
    return z[:, 0] ** 2 + 1e6 * (z[:, 1:] ** 2).sum(axis=1)


def _f_sharp_ridge(z, rng):
    return z[:, 0] ** 2 + 100.0 * np.sqrt((z[:, 1:] ** 2).sum(axis=1))


def _f_different_powers(z, rng):
    d = z.shape[1]
    expo = 2.0 + (4.0 * np.arange(d) / (d - 1) if d > 1 else np.zeros(1))
    return np.sqrt((np.abs(z) ** expo).sum(axis=1))


def _f_weierstrass(z, rng):
    a, b, k_max = 0.5, 3.0, 11
    k = np.arange(k_max + 1)
    ak = a**k
    bk = b**k
    inner = (ak * np.cos(2 * np.pi * bk * (z[..., None] + 0.5))).sum(axis=-1)
    offset = float((ak * np.cos(np.pi * bk)).sum())
    return inner.sum(axis=1) - z.shape[1] * offset


def _f_schaffers(z, rng, cond_exponent=1.0):
    zz = _axis_scale(z.shape[1], cond_exponent) * z
    if zz.shape[1] == 1:
        s = np.abs(zz[:, [0]])
    else:
        s = np.sqrt(zz[:, :-1] ** 2 + zz[:, 1:] ** 2)
    return ((np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s**0.2) ** 2).mean(axis=1)) ** 2


def _f_composite_grie_rosen(z, rng):
    d = z.shape[1]
    zz = max(1.0, np.sqrt(d) / 8.0) * z + 1.0
    if d == 1:
        return np.zeros(z.shape[0])
    s = 100.0 * (zz[:, :-1] ** 2 - zz[:, 1:]) ** 2 + (zz[:, :-1] - 1.0) ** 2
    return 10.0 * (s / 4000.0 - np.cos(s)).mean(axis=1) + 10.0


def _f_schwefel(z, rng):
    # Classic v*sin(sqrt|v|) landscape with optimum at v = 420.9687...;
    # outside |v| <= 500 the value is folded back and damped so the
    # function stays bounded and the global optimum stays at z = 0.
    d = z.shape[1]
    v = 100.0 * z + 420.9687462275036
    av = np.abs(v)
    inside = av <= 500.0
    folded = np.where(v > 0, 500.0 - np.mod(av, 500.0), np.mod(av, 500.0) - 500.0)
    w = np.where(inside, v, folded)
    g = w * np.sin(np.sqrt(np.abs(w)))
    penalty = np.where(inside, 0.0, (av - 500.0) ** 2 / (10000.0 * d))
    return 418.9828872724339 * d - g.sum(axis=1) + penalty.sum(axis=1)


@lru_cache(maxsize=512)
def _gallagher_peaks(name: str, instance: int, dim: int, n_peaks: int):
    rng = np.random.default_rng(_instance_seed(name, instance, dim) ^ 0xA5A5)
    centers = rng.uniform(-4.9, 4.9, size=(n_peaks, dim))
    centers[0] = _instance_parts(name, instance, dim)[0]
    weights = np.concatenate([[10.0], 1.1 + 8.0 * np.arange(n_peaks - 1) / max(n_peaks - 2, 1)])
    conditions = np.concatenate([[1000.0], 1000.0 ** rng.uniform(0, 1, size=n_peaks - 1)])
    scales = []
    for c in conditions:
        diag = c ** np.linspace(0, 1, dim) / c**0.25
        scales.append(rng.permutation(diag))
    return centers, weights, np.array(scales)


_CHUNK = 8192  # keeps (chunk, peaks/terms, dim) temporaries modest


def _f_gallagher(x, name, instance, dim, n_peaks):
    centers, weights, scales = _gallagher_peaks(name, instance, dim, n_peaks)
    out = np.empty(len(x))
    for s in range(0, len(x), _CHUNK):
        block = x[s : s + _CHUNK]
        diff = block[:, None, :] - centers[None, :, :]  # (chunk, peaks, dim)
        quad = (diff**2 * scales[None, :, :]).sum(axis=2)
        vals = weights[None, :] * np.exp(-quad / (2.0 * dim))
        out[s : s + _CHUNK] = (10.0 - vals.max(axis=1)) ** 2
    return out


def _f_katsuura(z, rng):
    d = z.shape[1]
    j = 2.0 ** np.arange(1, 33)
    expo = 10.0 / d**1.2
    out = np.empty(len(z))
    for s in range(0, len(z), _CHUNK):
        block = z[s : s + _CHUNK]
        zj = block[..., None] * j
        frac = np.abs(zj - np.round(zj)) / j
        inner = 1.0 + (np.arange(1, d + 1)) * frac.sum(axis=-1)
        out[s : s + _CHUNK] = (10.0 / d**2) * np.prod(inner**expo, axis=1) - 10.0 / d**2
    return out


def _f_lunacek(z_hat, z_rot, rng):
    d = z_hat.shape[1]
    mu0, dpar = 2.5, 1.0
    s = 1.0 - 1.0 / (2.0 * np.sqrt(d + 20.0) - 8.2)
    mu1 = -np.sqrt((mu0**2 - dpar) / s)
    term0 = ((z_hat - mu0) ** 2).sum(axis=1)
    term1 = dpar * d + s * ((z_hat - mu1) ** 2).sum(axis=1)
    return np.minimum(term0, term1) + 10.0 * (
        d - np.cos(2 * np.pi * z_rot).sum(axis=1)
    )


def eval_function(
    name: str,
    instance: int,
    dim: int,
    x,
    shift_override: np.ndarray | None = None,
) -> np.ndarray | float:
    """Evaluate one named function at a point or a batch of points.

    ``shift_override`` replaces the seeded shift vector (useful for pinning
    the optimum at the origin in tests). Out-of-box inputs are evaluated
    as-is; every function stays finite on all of R^dim.
    """
    if name not in _CATALOG:
        raise UnknownFunction(name)
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimMismatch(f"expected points of dimension {dim}, got shape {pts.shape}")

    shift, rotation = _instance_parts(name, instance, dim)
    if shift_override is not None:
        shift = np.asarray(shift_override, dtype=float)
        if shift.shape != (dim,):
            raise DimMismatch(f"shift_override must have shape ({dim},)")

    z = pts - shift
    if rotation is not None:
        z = z @ rotation.T

    if name == "Sphere":
        out = _f_sphere(z, None)
    elif name in ("Ellipsoidal", "Ellipsoidal_high_cond"):
        out = _f_ellipsoidal(z, None)
    elif name == "Rastrigin" or name == "Rastrigin_F15":
        out = _f_rastrigin(z, None)
    elif name == "Buche_Rastrigin":
        out = _f_buche_rastrigin(z, None)
    elif name == "Linear_Slope":
        out = _f_linear_slope(pts, None, shift)
    elif name == "Attractive_Sector":
        sector_dir = shift @ rotation.T
        out = _f_attractive_sector(z, None, sector_dir)
    elif name == "Step_Ellipsoidal":
        out = _f_step_ellipsoidal(z, None)
    elif name in ("Rosenbrock_original", "Rosenbrock_rotated"):
        out = _f_rosenbrock(z, None)
    elif name == "Discus":
        out = _f_discus(z, None)
    elif name == "Bent_Cigar":
        out = _f_bent_cigar(z, None)
    elif name == "Sharp_Ridge":
        out = _f_sharp_ridge(z, None)
    elif name == "Different_Powers":
        out = _f_different_powers(z, None)
    elif name == "Weierstrass":
        out = _f_weierstrass(z, None)
    elif name == "Schaffers":
        out = _f_schaffers(z, None, 1.0)
    elif name == "Schaffers_high_cond":
        out = _f_schaffers(z, None, 3.0)
    elif name == "Composite_Grie_rosen":
        out = _f_composite_grie_rosen(z, None)
    elif name == "Schwefel":
        out = _f_schwefel(z, None)
    elif name == "Gallagher_101Peaks":
        out = _f_gallagher(pts, name, instance, dim, 101)
    elif name == "Gallagher_21Peaks":
        out = _f_gallagher(pts, name, instance, dim, 21)
    elif name == "Katsuura":
        out = _f_katsuura(z, None)
    elif name == "Lunacek_bi_Rastrigin":
        sgn = np.where(shift >= 0, 1.0, -1.0)
        z_hat = 2.0 * sgn * pts
        z_rot = z_hat - 2.5
        if rotation is not None:
            z_rot = z_rot @ rotation.T
        out = _f_lunacek(z_hat, z_rot, None)
    else:  # pragma: no cover
        raise UnknownFunction(name)

    return float(out[0]) if single else out
