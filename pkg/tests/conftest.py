"""Shared fixtures: the cross-validation corpus and its cached results."""

import time
from dataclasses import dataclass

import numpy as np
import pytest

from maslov_count import catalog
from maslov_count.counting import renormalized_count
from maslov_count.flow import maslov_box_audit
from maslov_count.oracle import (
    _spectrum,
    report_from_spectra,
    standard_maslov_count,
)
from maslov_count.propagation import default_grid

CORPUS_GRID = default_grid(1001)
N_RANDOM = 20


@dataclass
class CorpusEntry:
    name: str
    sys: object
    bc: object
    window: tuple
    oracle_h: float
    spectra: tuple = None  # (coarse, fine, fine_dim)


@dataclass
class CorpusResult:
    entry: CorpusEntry
    renormalized: object
    standard: int
    standard_details: dict
    fd: object


def _spectra_pair(sys, bc, h):
    n_steps = int(round(1.0 / h))
    coarse, _ = _spectrum(sys, bc, n_steps)
    fine, dim = _spectrum(sys, bc, 2 * n_steps)
    return coarse, fine, dim


def choose_window(spectra, interval, prefer=0.0, max_eigs=3, limit=80.0):
    """Gap-midpoint window around the eigenvalues nearest ``prefer``.

    Keeps both endpoints at least twenty mesh-drifts away from any
    eigenvalue so the finite-difference count is unambiguous at h and
    h/2, and keeps the window inside the admissible interval.
    """
    coarse, fine, _ = spectra
    lo_adm, hi_adm = interval
    sel = fine[(fine > max(-limit, lo_adm)) & (fine < min(limit, hi_adm))]
    if sel.size < 2:
        raise RuntimeError("not enough eigenvalues to frame a window")
    drift = np.array([np.abs(coarse - ev).min() for ev in sel])
    k0 = int(np.argmin(np.abs(sel - prefer)))
    k1 = min(k0 + max_eigs - 1, sel.size - 2)
    while k1 > k0 and sel[k1] - sel[k0] > 30.0:
        k1 -= 1

    lam1 = 0.5 * (sel[k0 - 1] + sel[k0]) if k0 > 0 \
        else sel[k0] - max(1.0, 40 * drift[k0])
    lam2 = 0.5 * (sel[k1] + sel[k1 + 1])
    margin1 = min(abs(lam1 - sel[k0]),
                  abs(lam1 - sel[k0 - 1]) if k0 > 0 else np.inf)
    margin2 = min(abs(lam2 - sel[k1]), abs(lam2 - sel[k1 + 1]))
    if margin1 < 20 * drift[k0] or margin2 < 20 * drift[k1]:
        raise RuntimeError("window margins too tight for this mesh")
    if np.isfinite(lo_adm):
        lam1 = max(lam1, lo_adm + 1e-6)
    if np.isfinite(hi_adm):
        lam2 = min(lam2, hi_adm - 1e-6)
    return float(lam1), float(lam2)


def _build_corpus():
    """The cross-validation corpus: three bundled demonstration systems
    plus seeded random smooth instances, windows framed by the oracle."""
    entries = [
        CorpusEntry("dirac-demo", *catalog.dirac_demo(),
                    window=None, oracle_h=1 / 200),
        CorpusEntry("sl-demo", *catalog.sturm_liouville_demo(),
                    window=None, oracle_h=1 / 200),
        CorpusEntry("dae-demo", *catalog.dae_demo(window=(-10.0, 0.0)),
                    window=(-10.0, 0.0), oracle_h=1 / 200),
    ]
    for entry in entries:
        entry.spectra = _spectra_pair(entry.sys, entry.bc, entry.oracle_h)
        if entry.window is None:
            entry.window = choose_window(entry.spectra, entry.sys.interval)
    seed = 0
    while len(entries) < 3 + N_RANDOM and seed < 80:
        name, sys, bc = catalog.random_instance(seed)
        seed += 1
        try:
            spectra = _spectra_pair(sys, bc, 1 / 128)
            window = choose_window(spectra, sys.interval)
        except RuntimeError:
            continue
        entries.append(CorpusEntry(name, sys, bc, window, 1 / 128,
                                   spectra=spectra))
    if len(entries) < 3 + N_RANDOM:
        raise RuntimeError("could not assemble the randomized corpus")
    return entries


@pytest.fixture(scope="session")
def corpus():
    start = time.monotonic()
    entries = _build_corpus()
    return entries, time.monotonic() - start


@pytest.fixture(scope="session")
def corpus_results(corpus):
    """Criterion-3 computation: all three counts per corpus entry.

    The elapsed time includes the corpus build (its eigensolves are the
    finite-difference side of the comparison).
    """
    entries, build_elapsed = corpus
    start = time.monotonic()
    results = []
    for entry in entries:
        ren = renormalized_count(entry.sys, entry.bc, *entry.window,
                                 x_grid=CORPUS_GRID)
        std, details = standard_maslov_count(entry.sys, entry.bc, *entry.window,
                                             x_grid=CORPUS_GRID)
        coarse, fine, dim = entry.spectra
        fd = report_from_spectra(coarse, fine, *entry.window,
                                 h=entry.oracle_h, matrix_dim=dim)
        results.append(CorpusResult(entry=entry, renormalized=ren,
                                    standard=std, standard_details=details,
                                    fd=fd))
    elapsed = build_elapsed + (time.monotonic() - start)
    return results, elapsed


@pytest.fixture(scope="session")
def corpus_audits(corpus):
    """Criterion-4 computation: box audits for every corpus entry."""
    entries, _ = corpus
    audits = []
    for entry in entries:
        audits.append(maslov_box_audit(entry.sys, entry.bc, *entry.window,
                                       x_grid=default_grid(801),
                                       lam_samples=41))
    return audits
