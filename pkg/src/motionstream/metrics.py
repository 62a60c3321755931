"""Distribution and alignment metrics over a fixed handcrafted feature
embedding: Frechet distance, diversity, matched-pair distance,
R-precision, root-path RMSE, genre fidelity, and task success rates.

The embedding is deterministic (per-DOF statistics plus root speed
statistics); absolute values are not comparable to encoder-learned
feature spaces, only the metric implementations are.
"""

import numpy as np

from .motion import MotionSequence

R_PRECISION_BATCH = 32
TEXT_MPJPE_LIMIT_CM = 80.0  # 0.8 m
TRAJ_RMSE_LIMIT_M = 1.0


def features(seq: MotionSequence) -> np.ndarray:
    """Per-DOF mean / std / mean-absolute-velocity plus root speed stats (89,).

    Translation-invariant: root enters through speeds only.
    """
    if len(seq) < 2:
        raise ValueError("feature embedding needs at least 2 frames")
    vel = np.diff(seq.dof, axis=0) * seq.fps
    root_speed = np.linalg.norm(np.diff(seq.root_pos[:, :2], axis=0), axis=1) * seq.fps
    return np.concatenate(
        [
            seq.dof.mean(axis=0),
            seq.dof.std(axis=0),
            np.abs(vel).mean(axis=0),
            [root_speed.mean(), root_speed.std()],
        ]
    )


def _gaussian_fit(feats: np.ndarray):
    n, d = feats.shape
    mu = feats.mean(axis=0)
    cov = np.cov(feats, rowvar=False) if n > 1 else np.zeros((d, d))
    cov = np.atleast_2d(cov)
    if n < d + 1:
        cov = cov + 1e-6 * np.eye(d)
    return mu, cov


def _sqrtm_sym(m: np.ndarray, neg_tol: float = -1e-8) -> np.ndarray:
    """Square root of a symmetric PSD matrix via eigendecomposition;
    eigenvalues below the tolerance are clamped to zero."""
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    if np.any(vals < neg_tol * max(1.0, float(np.abs(vals).max()))):
        vals = np.maximum(vals, 0.0)
    vals = np.maximum(vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(set_a, set_b) -> float:
    """||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}), via the symmetric
    form Tr((sqrt(Sa) Sb sqrt(Sa))^{1/2})."""
    a = np.atleast_2d(np.asarray(set_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(set_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("fid needs non-empty feature sets")
    mu_a, cov_a = _gaussian_fit(a)
    mu_b, cov_b = _gaussian_fit(b)
    root_a = _sqrtm_sym(cov_a)
    cross = _sqrtm_sym(root_a @ cov_b @ root_a)
    diff = mu_a - mu_b
    val = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    return max(val, 0.0)


def diversity(feature_set, num_pairs: int = 300, rng=None) -> float:
    """Mean Euclidean distance over randomly sampled distinct pairs."""
    feats = np.atleast_2d(np.asarray(feature_set, dtype=np.float64))
    n = feats.shape[0]
    if n < 2:
        raise ValueError("diversity needs at least 2 samples")
    rng = rng or np.random.Generator(np.random.PCG64(0))
    i = rng.integers(n, size=num_pairs)
    j = rng.integers(n - 1, size=num_pairs)
    j = np.where(j >= i, j + 1, j)  # distinct pairs
    return float(np.mean(np.linalg.norm(feats[i] - feats[j], axis=1)))


def mm_dist(motion_feats, condition_feats) -> float:
    """Mean distance between index-aligned motion/condition feature pairs."""
    m = np.atleast_2d(np.asarray(motion_feats, dtype=np.float64))
    c = np.atleast_2d(np.asarray(condition_feats, dtype=np.float64))
    if m.shape != c.shape:
        raise ValueError("mm_dist needs aligned sets of equal shape")
    return float(np.mean(np.linalg.norm(m - c, axis=1)))


def r_precision(motion_feats, condition_feats, k: int, batch: int = R_PRECISION_BATCH, rng=None) -> float:
    """Fraction (percent) of queries whose true pair ranks in the top-k of a
    shuffled candidate batch; ties break by candidate position."""
    if k > batch:
        raise ValueError(f"k={k} exceeds the batch size {batch}")
    m = np.atleast_2d(np.asarray(motion_feats, dtype=np.float64))
    c = np.atleast_2d(np.asarray(condition_feats, dtype=np.float64))
    if m.shape[0] != c.shape[0]:
        raise ValueError("paired sets must align by index")
    if m.shape[0] < batch:
        raise ValueError(f"need at least {batch} pairs")
    rng = rng or np.random.Generator(np.random.PCG64(0))
    hits = 0
    total = 0
    n_batches = m.shape[0] // batch
    for bi in range(n_batches):
        sl = slice(bi * batch, (bi + 1) * batch)
        q = m[sl]
        cand = c[sl]
        perm = rng.permutation(batch)
        cand_shuffled = cand[perm]
        true_pos = np.argsort(perm)  # where each query's true match landed
        d = np.linalg.norm(q[:, None, :] - cand_shuffled[None, :, :], axis=2)
        order = np.argsort(d, axis=1, kind="stable")
        for qi in range(batch):
            rank = int(np.where(order[qi] == true_pos[qi])[0][0])
            hits += rank < k
            total += 1
    return 100.0 * hits / total


def root_rmse(seq: MotionSequence, target_pos, target_fps: float) -> float:
    """RMSE (m) between horizontal root positions and the target path
    resampled onto the sequence timeline."""
    target = np.asarray(target_pos, dtype=np.float64)
    times = np.arange(len(seq)) / seq.fps
    src = np.arange(target.shape[0]) / target_fps
    times = np.clip(times, 0.0, src[-1])
    tx = np.interp(times, src, target[:, 0])
    ty = np.interp(times, src, target[:, 1])
    err = seq.root_pos[:, 0] - tx, seq.root_pos[:, 1] - ty
    return float(np.sqrt(np.mean(err[0] ** 2 + err[1] ** 2)))


def success_rate(trials, task: str, mpjpe_limit_cm: float = TEXT_MPJPE_LIMIT_CM, rmse_limit_m: float = TRAJ_RMSE_LIMIT_M) -> float:
    """Percent of trials passing the per-task criteria (never-fallen always)."""
    if not trials:
        raise ValueError("no trials")
    if task not in ("text", "trajectory", "music"):
        raise ValueError(f"unknown task {task!r}")
    ok = 0
    for t in trials:
        good = not t.fell
        if task == "text":
            good = good and t.mpjpe_cm < mpjpe_limit_cm
        elif task == "trajectory":
            good = good and t.root_rmse_m < rmse_limit_m
        ok += good
    return 100.0 * ok / len(trials)


def genre_score(groups: dict) -> float:
    """1 - (mean within-genre distance / mean cross-genre distance), in [0, 1].

    Degenerate all-identical input (0/0) scores 0.
    """
    names = sorted(groups)
    if len(names) < 2 or any(len(groups[g]) < 2 for g in names):
        raise ValueError("genre_score needs >= 2 genres with >= 2 samples each")
    sets = {g: np.atleast_2d(np.asarray(groups[g], dtype=np.float64)) for g in names}
    within = []
    for g in names:
        f = sets[g]
        for i in range(f.shape[0]):
            for j in range(i + 1, f.shape[0]):
                within.append(np.linalg.norm(f[i] - f[j]))
    cross = []
    for gi in range(len(names)):
        for gj in range(gi + 1, len(names)):
            a, b = sets[names[gi]], sets[names[gj]]
            d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
            cross.extend(d.reshape(-1))
    mean_within = float(np.mean(within))
    mean_cross = float(np.mean(cross))
    if mean_cross <= 1e-12:
        return 0.0
    return float(np.clip(1.0 - mean_within / mean_cross, 0.0, 1.0))
