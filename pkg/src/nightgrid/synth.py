"""Deterministic synthetic luminosity grids and corpora with known truth.

Every random draw comes from a splitmix64 stream (the published
constants), so identical specs give bit-identical output across runs,
processes and platforms. Gaussian noise is Box-Muller on consecutive
stream uniforms: each normal consumes two uniforms and takes the cosine
branch only.

Cities are sums of Gaussian blobs on integer cell centers. Blob centers
sit on a lattice whose spacing is drawn per city; tight spacing merges
blobs into near-solid blocks (compact hotspot sets), wide spacing spreads
them out, so a corpus spans a usable range of compactness values. With
zero noise, near-zero background and well-separated sharp blobs the
extracted hotspot count tracks the blob count, which is what ties the
generated corpus back to the scaling law it encodes.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import compactness, hotspots
from .errors import DataError
from .grid_io import CoordMode, GridHeader, LuminosityGrid, write_ascii_grid

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64_mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 stream of 64-bit integers and derived draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return splitmix64_mix(self._state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_gauss(self, sd: float = 1.0) -> float:
        u1 = self.next_float()
        u2 = self.next_float()
        return sd * math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)

    def next_uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def shuffle(self, items: list) -> None:
        """Fisher-Yates driven by the stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]


def splitmix64_stream(seed: int, n: int) -> np.ndarray:
    """First n outputs of the sequential stream, vectorized (uint64)."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def gaussian_field(seed: int, n: int, sd: float) -> np.ndarray:
    """n Box-Muller normals from the stream, matching SplitMix64.next_gauss."""
    u = (splitmix64_stream(seed, 2 * n) >> np.uint64(11)) * 2.0**-53
    u1, u2 = u[0::2], u[1::2]
    return sd * np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def city_subseed(seed: int, index: int) -> int:
    """Per-city sub-seed: the index-th output of the corpus stream."""
    return splitmix64_mix((seed + (index + 1) * _GAMMA) & _MASK64)


@dataclass(frozen=True)
class Blob:
    row: float
    col: float
    amplitude: float
    sigma: float


@dataclass(frozen=True)
class SynthSpec:
    """One synthetic city: Gaussian blobs on a background plus noise."""

    nrows: int
    ncols: int
    cellsize: float
    blobs: tuple[Blob, ...]
    background: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.nrows < 1 or self.ncols < 1 or not self.cellsize > 0:
            raise DataError("invalid grid shape or cellsize")
        if self.background < 0 or self.noise_sd < 0:
            raise DataError("background and noise_sd must be non-negative")
        for b in self.blobs:
            if not (0 <= b.row < self.nrows and 0 <= b.col < self.ncols):
                raise DataError(f"blob center ({b.row}, {b.col}) outside grid")
            if not b.amplitude > self.background:
                raise DataError("blob amplitude must exceed background")
            if not b.sigma > 0:
                raise DataError("blob sigma must be positive")


def generate_city(spec: SynthSpec) -> tuple[LuminosityGrid, list[tuple[float, float]]]:
    """Render one city grid; returns (grid, ground-truth blob centers).

    Each blob is evaluated only inside a +-6 sigma window. Noise, when
    present, is drawn cell by cell in row-major order; the final value is
    clipped at zero.
    """
    values = np.full((spec.nrows, spec.ncols), spec.background, dtype=np.float64)
    for b in spec.blobs:
        w = max(1, int(math.ceil(6.0 * b.sigma)))
        r0, r1 = max(0, int(b.row) - w), min(spec.nrows, int(b.row) + w + 1)
        c0, c1 = max(0, int(b.col) - w), min(spec.ncols, int(b.col) + w + 1)
        rr = np.arange(r0, r1, dtype=np.float64)[:, None]
        cc = np.arange(c0, c1, dtype=np.float64)[None, :]
        d2 = (rr - b.row) ** 2 + (cc - b.col) ** 2
        values[r0:r1, c0:c1] += b.amplitude * np.exp(-d2 / (2.0 * b.sigma**2))
    if spec.noise_sd > 0:
        noise = gaussian_field(spec.seed, values.size, spec.noise_sd)
        values += noise.reshape(values.shape)
    np.maximum(values, 0.0, out=values)
    header = GridHeader(
        ncols=spec.ncols,
        nrows=spec.nrows,
        xll=0.0,
        yll=0.0,
        cellsize=spec.cellsize,
        nodata=-9999.0,
        coord_mode=CoordMode.PLANAR_METERS,
    )
    grid = LuminosityGrid(
        header=header, values=values, valid_mask=np.ones(values.shape, dtype=bool)
    )
    return grid, [(b.row, b.col) for b in spec.blobs]


PROFILES = ("clustered", "ring", "scattered")


@dataclass(frozen=True)
class SynthCorpusSpec:
    """A whole corpus encoding a known scaling law and GDP generator.

    Blob count per city is max(1, round(alpha * P^beta)) with log-uniform
    populations. GDP per km^2 follows the quadratic growth model applied
    to the city's *realized* compactness index, so regression tests have
    an exact generator to recover.
    """

    n_cities: int
    alpha: float
    beta: float
    population_range: tuple[float, float]
    compactness_profile: str = "clustered"
    seed: int = 0
    cellsize: float = 1000.0
    blob_sigma: float = 0.3
    blob_amplitude: float = 100.0
    background: float = 0.0
    noise_sd: float = 0.0
    spacing_range: tuple[int, int] = (3, 3)  # lattice spacing in cells
    grid_side: Optional[int] = None  # fixed side; None sizes per city
    gdp_coeffs: tuple[float, float, float, float] = (5.3, 0.6, 6.3, -5.1)
    gdp_noise_sd: float = 0.3
    gdp_index: str = "pi"
    regions: tuple[str, ...] = ("other",)

    def __post_init__(self):
        if self.n_cities < 1:
            raise DataError("n_cities must be >= 1")
        lo, hi = self.population_range
        if not (0 < lo <= hi):
            raise DataError("population_range must be positive and ordered")
        if self.compactness_profile not in PROFILES:
            raise DataError(f"unknown profile {self.compactness_profile!r}")
        s_lo, s_hi = self.spacing_range
        if not (1 <= s_lo <= s_hi):
            raise DataError("spacing_range must satisfy 1 <= lo <= hi")
        if self.gdp_index not in ("pi", "ai"):
            raise DataError("gdp_index must be 'pi' or 'ai'")


@dataclass(frozen=True)
class SynthCity:
    """One generated city with its ground truth."""

    city_id: str
    region: str
    population: float
    gdp: float
    area_km2: float
    grid: LuminosityGrid
    blob_centers: tuple[tuple[int, int], ...]
    blob_count: int
    spacing: int
    pi: float
    ai: float
    hotspot_count: int


def _lattice_positions(
    profile: str, n_blobs: int, spacing: int, side: int, rng: SplitMix64
) -> list[tuple[int, int]]:
    """Integer blob centers with pairwise separation >= spacing cells."""
    margin = 6
    center = side // 2
    if profile == "ring":
        radius = max(n_blobs * spacing / (2.0 * math.pi), 2.0 * spacing)
        radius = min(radius, center - margin)
        positions: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        k = 0
        while len(positions) < n_blobs:
            angle = 2.0 * math.pi * k / n_blobs
            pos = (
                int(round(center + radius * math.sin(angle))),
                int(round(center + radius * math.cos(angle))),
            )
            k += 1
            if pos not in seen:
                seen.add(pos)
                positions.append(pos)
            if k > 4 * n_blobs:  # rounding collisions on a tight ring
                radius += 1
                positions.clear()
                seen.clear()
                k = 0
        return positions

    lo = margin
    hi = side - margin
    slots = [(r, c) for r in range(lo, hi, spacing) for c in range(lo, hi, spacing)]
    if len(slots) < n_blobs:
        raise DataError(
            f"grid side {side} too small for {n_blobs} blobs at spacing {spacing}"
        )
    if profile == "clustered":
        slots.sort(key=lambda rc: ((rc[0] - center) ** 2 + (rc[1] - center) ** 2, rc))
        return slots[:n_blobs]
    rng.shuffle(slots)  # scattered
    return slots[:n_blobs]


def _auto_side(n_blobs: int, spacing: int) -> int:
    return 2 * spacing * int(math.ceil(math.sqrt(n_blobs))) + 16


def generate_corpus(spec: SynthCorpusSpec) -> list[SynthCity]:
    """Generate all cities of a corpus in memory, ground truth attached."""
    out: list[SynthCity] = []
    b1, b2, b3, b4 = spec.gdp_coeffs
    for i in range(spec.n_cities):
        sub = city_subseed(spec.seed, i)
        rng = SplitMix64(sub)
        lo, hi = spec.population_range
        population = math.exp(rng.next_uniform(math.log(lo), math.log(hi)))
        n_blobs = max(1, round(spec.alpha * population**spec.beta))
        s_lo, s_hi = spec.spacing_range
        spacing = s_lo if s_lo == s_hi else s_lo + rng.next_u64() % (s_hi - s_lo + 1)
        side = spec.grid_side or _auto_side(n_blobs, spacing)
        positions = _lattice_positions(
            spec.compactness_profile, n_blobs, spacing, side, rng
        )
        blobs = tuple(
            Blob(row=r, col=c, amplitude=spec.blob_amplitude, sigma=spec.blob_sigma)
            for r, c in positions
        )
        city_spec = SynthSpec(
            nrows=side,
            ncols=side,
            cellsize=spec.cellsize,
            blobs=blobs,
            background=spec.background,
            noise_sd=spec.noise_sd,
            seed=splitmix64_mix(sub ^ 0xA5A5A5A5A5A5A5A5),
        )
        grid, _ = generate_city(city_spec)

        hs = hotspots.extract_hotspots(grid)
        indices = compactness.compactness_indices(hs)
        com = indices.pi if spec.gdp_index == "pi" else indices.ai
        ln_y = (
            b1
            + b2 * math.log(population)
            + b3 * com
            + b4 * com**2
            + rng.next_gauss(spec.gdp_noise_sd)
        )
        area_km2 = grid.n_valid * spec.cellsize**2 / 1e6
        out.append(
            SynthCity(
                city_id=f"SYN{i:04d}",
                region=spec.regions[i % len(spec.regions)],
                population=population,
                gdp=math.exp(ln_y) * area_km2,
                area_km2=area_km2,
                grid=grid,
                blob_centers=tuple(positions),
                blob_count=n_blobs,
                spacing=spacing,
                pi=indices.pi,
                ai=indices.ai,
                hotspot_count=hs.count,
            )
        )
    return out


def write_corpus(spec: SynthCorpusSpec, out_dir: str) -> tuple[str, str]:
    """Write a corpus to disk in the formats the pipeline reads.

    Produces rasters/<id>.asc, cities.csv and ground_truth.json; returns
    (city_table_path, ground_truth_path).
    """
    raster_dir = os.path.join(out_dir, "rasters")
    os.makedirs(raster_dir, exist_ok=True)
    cities = generate_corpus(spec)

    table_path = os.path.join(out_dir, "cities.csv")
    truth_path = os.path.join(out_dir, "ground_truth.json")
    lines = ["city_id,name,region,population,gdp,raster_path"]
    truth = []
    for city in cities:
        raster_path = os.path.join(raster_dir, f"{city.city_id}.asc")
        with open(raster_path, "w", encoding="utf-8") as fh:
            fh.write(write_ascii_grid(city.grid))
        lines.append(
            f"{city.city_id},{city.city_id},{city.region},"
            f"{city.population:.10g},{city.gdp:.10g},{raster_path}"
        )
        truth.append(
            {
                "city_id": city.city_id,
                "region": city.region,
                "population": city.population,
                "gdp": city.gdp,
                "area_km2": city.area_km2,
                "blob_count": city.blob_count,
                "blob_centers": [list(rc) for rc in city.blob_centers],
                "spacing": city.spacing,
                "pi": city.pi,
                "ai": city.ai,
                "hotspot_count": city.hotspot_count,
            }
        )
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(
            {"spec": _spec_to_dict(spec), "cities": truth}, fh, indent=2, sort_keys=True
        )
    return table_path, truth_path


def _spec_to_dict(spec: SynthCorpusSpec) -> dict:
    return {
        "n_cities": spec.n_cities,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "population_range": list(spec.population_range),
        "compactness_profile": spec.compactness_profile,
        "seed": spec.seed,
        "cellsize": spec.cellsize,
        "blob_sigma": spec.blob_sigma,
        "blob_amplitude": spec.blob_amplitude,
        "background": spec.background,
        "noise_sd": spec.noise_sd,
        "spacing_range": list(spec.spacing_range),
        "grid_side": spec.grid_side,
        "gdp_coeffs": list(spec.gdp_coeffs),
        "gdp_noise_sd": spec.gdp_noise_sd,
        "gdp_index": spec.gdp_index,
        "regions": list(spec.regions),
    }


def corpus_spec_from_dict(data: dict) -> SynthCorpusSpec:
    """Build a corpus spec from parsed JSON (the `synth` CLI input)."""
    kwargs = dict(data)
    for key in ("population_range", "spacing_range", "gdp_coeffs", "regions"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return SynthCorpusSpec(**kwargs)
    except TypeError as exc:
        raise DataError(f"bad corpus spec: {exc}") from None
