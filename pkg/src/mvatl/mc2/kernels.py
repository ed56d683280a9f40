"""One-step predecessor kernels over edge arrays.

Every kernel takes the flattened group index ``flat = src * n_keys + akey``
(one entry per transition, where ``akey`` encodes the coalition's share of
the joint action) and answers, per state, a quantified one-step question:

* ``coop_pre``     -- some coalition action whose completions all hit Q
* ``navoid_pre``   -- every coalition action has a completion hitting Q
* ``all_succ``     -- every successor hits Q      (empty-coalition coop)
* ``any_succ``     -- some successor hits Q       (empty-coalition navoid)

States with no outgoing edges resolve vacuously: an empty meet over paths
is truth, an empty join is falsity.  The numba backend compiles the scatter
loops; the numpy backend uses boolean scatter assignment.  Both give
identical, schedule-independent results.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND = None


def _resolve_backend() -> str:
    choice = os.environ.get("MVATL_KERNEL", "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"MVATL_KERNEL must be auto, numba or numpy, not {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


def kernel_backend() -> str:
    global _BACKEND
    if _BACKEND is None:
        _BACKEND = _resolve_backend()
    return _BACKEND


def set_kernel_backend(name: str | None) -> None:
    """Force a backend ("numba"/"numpy") or reset to the environment choice."""
    global _BACKEND
    if name is None:
        _BACKEND = None
        return
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    _BACKEND = name


# --- numpy implementations ---------------------------------------------------

def coop_pre_numpy(flat, dst, n_states, n_keys, in_q):
    in_target = in_q[dst]
    exists = np.zeros(n_states * n_keys, dtype=bool)
    bad = np.zeros(n_states * n_keys, dtype=bool)
    exists[flat] = True
    bad[flat[~in_target]] = True
    return (exists & ~bad).reshape(n_states, n_keys).any(axis=1)


def navoid_pre_numpy(flat, dst, n_states, n_keys, in_q):
    in_target = in_q[dst]
    exists = np.zeros(n_states * n_keys, dtype=bool)
    good = np.zeros(n_states * n_keys, dtype=bool)
    exists[flat] = True
    good[flat[in_target]] = True
    return ~((exists & ~good).reshape(n_states, n_keys).any(axis=1))


def all_succ_numpy(src, dst, n_states, in_q):
    out = np.ones(n_states, dtype=bool)
    out[src[~in_q[dst]]] = False
    return out


def any_succ_numpy(src, dst, n_states, in_q):
    out = np.zeros(n_states, dtype=bool)
    out[src[in_q[dst]]] = True
    return out


# --- numba implementations ----------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def coop_pre_nb(flat, dst, n_states, n_keys, in_q):  # pragma: no cover
        exists = np.zeros(n_states * n_keys, dtype=np.bool_)
        bad = np.zeros(n_states * n_keys, dtype=np.bool_)
        for e in range(flat.shape[0]):
            f = flat[e]
            exists[f] = True
            if not in_q[dst[e]]:
                bad[f] = True
        out = np.zeros(n_states, dtype=np.bool_)
        for q in range(n_states):
            base = q * n_keys
            for k in range(n_keys):
                if exists[base + k] and not bad[base + k]:
                    out[q] = True
                    break
        return out

    @njit(cache=True)
    def navoid_pre_nb(flat, dst, n_states, n_keys, in_q):  # pragma: no cover
        exists = np.zeros(n_states * n_keys, dtype=np.bool_)
        good = np.zeros(n_states * n_keys, dtype=np.bool_)
        for e in range(flat.shape[0]):
            f = flat[e]
            exists[f] = True
            if in_q[dst[e]]:
                good[f] = True
        out = np.ones(n_states, dtype=np.bool_)
        for q in range(n_states):
            base = q * n_keys
            for k in range(n_keys):
                if exists[base + k] and not good[base + k]:
                    out[q] = False
                    break
        return out

    @njit(cache=True)
    def all_succ_nb(src, dst, n_states, in_q):  # pragma: no cover
        out = np.ones(n_states, dtype=np.bool_)
        for e in range(src.shape[0]):
            if not in_q[dst[e]]:
                out[src[e]] = False
        return out

    @njit(cache=True)
    def any_succ_nb(src, dst, n_states, in_q):  # pragma: no cover
        out = np.zeros(n_states, dtype=np.bool_)
        for e in range(src.shape[0]):
            if in_q[dst[e]]:
                out[src[e]] = True
        return out

    return {
        "coop_pre": coop_pre_nb,
        "navoid_pre": navoid_pre_nb,
        "all_succ": all_succ_nb,
        "any_succ": any_succ_nb,
    }


_numba_fns = None


def _numba():
    global _numba_fns
    if _numba_fns is None:
        _numba_fns = _build_numba()
    return _numba_fns


# --- dispatching entry points ---------------------------------------------------

def coop_pre(flat, dst, n_states, n_keys, in_q):
    if kernel_backend() == "numba":
        return _numba()["coop_pre"](flat, dst, n_states, n_keys, in_q)
    return coop_pre_numpy(flat, dst, n_states, n_keys, in_q)


def navoid_pre(flat, dst, n_states, n_keys, in_q):
    if kernel_backend() == "numba":
        return _numba()["navoid_pre"](flat, dst, n_states, n_keys, in_q)
    return navoid_pre_numpy(flat, dst, n_states, n_keys, in_q)


def all_succ(src, dst, n_states, in_q):
    if kernel_backend() == "numba":
        return _numba()["all_succ"](src, dst, n_states, in_q)
    return all_succ_numpy(src, dst, n_states, in_q)


def any_succ(src, dst, n_states, in_q):
    if kernel_backend() == "numba":
        return _numba()["any_succ"](src, dst, n_states, in_q)
    return any_succ_numpy(src, dst, n_states, in_q)
