"""Speckle phantoms, Pratt's figure of merit and experiment drivers."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import ScaleSchedule, as_image
from .detector import DetectorParams, canny_baseline, detect_2d
from .filtering import ConnectionReport, DecisionParams, audit, filter_links, oracle_links

__all__ = [
    "PhantomSpec",
    "FomParams",
    "BENCHMARK_PSF",
    "benchmark_phantom",
    "default_region_image",
    "disk_region_image",
    "scattering_field",
    "generate_phantom",
    "region_boundaries",
    "fom",
    "falseconn_report",
    "run_table_experiment",
]


def default_region_image(shape=(256, 256)) -> np.ndarray:
    """Piecewise-constant scattering levels: background, an organ-like
    ellipse with a darker void and a bright inclusion, and a low-contrast
    layer near the top."""
    rows, cols = shape
    y, x = np.mgrid[:rows, :cols].astype(np.float64)
    y /= rows
    x /= cols
    img = np.full(shape, 1.0)
    img[y < 0.18] = 0.5
    ell = ((x - 0.5) / 0.33) ** 2 + ((y - 0.58) / 0.28) ** 2 < 1
    img[ell] = 6.0
    void = ((x - 0.4) / 0.1) ** 2 + ((y - 0.55) / 0.1) ** 2 < 1
    img[void] = 0.05
    incl = ((x - 0.65) / 0.07) ** 2 + ((y - 0.68) / 0.07) ** 2 < 1
    img[incl] = 8.0
    return img


def disk_region_image(shape=(128, 128), radius: float | None = None, inside: float = 2.0, outside: float = 1.0):
    rows, cols = shape
    r = radius if radius is not None else 0.3 * min(shape)
    y, x = np.mgrid[:rows, :cols]
    img = np.full(shape, float(outside))
    img[(y - rows / 2) ** 2 + (x - cols / 2) ** 2 < r * r] = inside
    return img


@dataclass(frozen=True)
class PhantomSpec:
    """Speckle phantom recipe.

    ``region_image`` holds the scattering level (standard deviation) of each
    pixel; regions are the sets of equal level. ``psf`` are the Gaussian
    widths (axial = rows, lateral = columns) in pixels.
    """

    region_image: np.ndarray = field(default_factory=default_region_image, repr=False)
    psf: tuple = (2.0, 4.0)
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        img = as_image(self.region_image)
        if np.any(img < 0):
            raise ValueError("scattering levels must be non-negative")
        object.__setattr__(self, "region_image", img)
        psf = tuple(float(v) for v in self.psf)
        if len(psf) != 2 or min(psf) <= 0:
            raise ValueError("psf needs two positive widths")
        object.__setattr__(self, "psf", psf)
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class FomParams:
    gamma: float = 0.11

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


# Finer speckle than the PhantomSpec default; used by the table experiments.
BENCHMARK_PSF = (1.25, 2.5)


def benchmark_phantom(seed: int, shape=(256, 256), noise_sigma: float = 0.05) -> PhantomSpec:
    """The default region image with the benchmark point-spread function."""
    return PhantomSpec(default_region_image(shape), BENCHMARK_PSF, noise_sigma, seed)


def _rng(seed: int, stream: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def scattering_field(spec: PhantomSpec) -> np.ndarray:
    """Diffuse scattering: region level times a standard normal per pixel."""
    return spec.region_image * _rng(spec.seed, 0).standard_normal(spec.region_image.shape)


def region_boundaries(region_image) -> np.ndarray:
    """One-pixel-wide boundary: pixels with an 8-neighbour of smaller label."""
    lev = np.asarray(region_image, dtype=np.float64)
    _, labels = np.unique(lev, return_inverse=True)
    labels = labels.reshape(lev.shape)
    smallest = ndimage.minimum_filter(labels, size=3, mode="nearest")
    return smallest < labels


def generate_phantom(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    """Speckle image in [0, 1] and its true edge mask.

    The scattering field is convolved with a unit-energy Gaussian PSF, so a
    region keeps its level as local standard deviation; the envelope is the
    absolute value, white noise is added and the result is scaled by its
    maximum and clipped at zero.
    """
    scat = scattering_field(spec)
    ax, lat = spec.psf
    blurred = ndimage.gaussian_filter(scat, sigma=(ax, lat), mode="reflect", truncate=4.0)
    blurred *= math.sqrt(4 * math.pi * ax * lat)
    img = np.abs(blurred)
    if spec.noise_sigma > 0:
        img = img + spec.noise_sigma * _rng(spec.seed, 1).standard_normal(img.shape)
    peak = img.max()
    if peak > 0:
        img = img / peak
    img = np.clip(img, 0.0, 1.0)
    img.setflags(write=False)
    truth = region_boundaries(spec.region_image)
    return img, truth


def fom(detected, truth, params: FomParams = FomParams()) -> float:
    """Pratt's figure of merit ``sum 1 / (1 + gamma d_i**2) / max(n_p, n_d)``.

    ``d_i`` is the exact Euclidean distance from each detected pixel to the
    nearest true edge pixel.
    """
    det = np.asarray(getattr(detected, "mask", detected), dtype=bool)
    tru = np.asarray(getattr(truth, "mask", truth), dtype=bool)
    if det.shape != tru.shape:
        raise ValueError("detected and truth masks differ in shape")
    n_p = int(tru.sum())
    if n_p == 0:
        raise ValueError("truth edge map is empty")
    n_d = int(det.sum())
    if n_d == 0:
        return 0.0
    d = ndimage.distance_transform_edt(~tru)
    return float((1.0 / (1.0 + params.gamma * d[det] ** 2)).sum() / max(n_p, n_d))


# ---------------------------------------------------------------------------
# Experiments


def falseconn_report(image, sched, params: DecisionParams, oracle=None) -> ConnectionReport:
    """Audit the sparse filter on every row of an image against edge focusing."""
    scales = sched.scales if isinstance(sched, ScaleSchedule) else ScaleSchedule.parse(sched).scales
    if oracle is None:
        oracle = oracle_links(image, scales[0], scales[-1], mode="rows")
    sparse = filter_links(image, scales, params, mode="rows")
    return audit(sparse, oracle)


def _config_images(config):
    """(name, image, truth) triples from the ``images`` or ``phantoms`` keys."""
    from .core import load_raster

    out = []
    for i, path in enumerate(config.get("images", [])):
        truth = None
        tpaths = config.get("truth", [])
        if i < len(tpaths):
            truth = load_raster(tpaths[i]) > 0.5
        out.append((str(path), load_raster(path), truth))
    phantoms = config.get("phantoms")
    if phantoms is None and not out:
        phantoms = [config.get("seed", 0)]
    for seed in phantoms or []:
        shape = tuple(config.get("shape", (256, 256)))
        spec = PhantomSpec(
            default_region_image(shape),
            tuple(config.get("psf", BENCHMARK_PSF)),
            float(config.get("noise_sigma", 0.05)),
            int(seed),
        )
        img, truth = generate_phantom(spec)
        out.append((f"phantom seed {seed}", img, truth))
    return out


def _alphas(config):
    a = config.get("alpha", [-0.5, 0.0, 0.5])
    return [float(v) for v in (a if isinstance(a, (list, tuple)) else [a])]


def run_table_experiment(kind: str, config: dict) -> str:
    """Run a table experiment and return CSV text.

    ``falseconn``: one column per (image, alpha) with false-connection
    percentages per scale pair, overall, and mean displacement.
    ``fom``: one row per image with the figure of merit of both detectors.

    Config keys: ``scales``, ``alpha``, ``threshold``, ``fraction``,
    ``seed``, ``psf``, ``noise_sigma`` plus ``images``/``truth`` (raster
    paths) or ``phantoms`` (list of seeds) and ``shape``.
    """
    sched = ScaleSchedule.parse(config.get("scales", [32, 16, 8, 4]))
    images = _config_images(config)
    buf = io.StringIO()
    w = csv.writer(buf)
    if kind == "falseconn":
        cols, reports = [], []
        for name, img, _ in images:
            oracle = oracle_links(img, sched.coarsest, sched.finest, mode="rows")
            for a in _alphas(config):
                reports.append(falseconn_report(img, sched, DecisionParams(alpha=a), oracle))
                cols.append(f"{name} alpha={a:g}")
        w.writerow(["metric"] + cols)
        for k, (label, _) in enumerate(reports[0].rows() if reports else []):
            w.writerow([label] + [f"{r.rows()[k][1]:.2f}" for r in reports])
    elif kind == "fom":
        thr = config.get("threshold", "robust")
        fparams = DetectorParams(
            threshold=thr if isinstance(thr, str) else float(thr),
            fraction=float(config.get("fraction", 0.1)),
            seed=int(config.get("seed", 0)),
        )
        alpha = _alphas(config)[-1]
        w.writerow(["signal", "proposed", "canny"])
        for name, img, truth in images:
            if truth is None:
                raise ValueError(f"{name}: no truth edge map")
            ours = detect_2d(img, sched, DecisionParams(alpha=alpha), fparams)
            canny = canny_baseline(img, sched.finest)
            w.writerow([name, f"{fom(ours, truth):.4f}", f"{fom(canny, truth):.4f}"])
    else:
        raise ValueError("kind must be 'falseconn' or 'fom'")
    return buf.getvalue()
