"""Per-image technique selection: engineered features, best-technique
labeling, a multinomial logistic-regression classifier, and the adaptive
routing entry point.

The classifier is deliberately linear; the model file is versioned so a
heavier model can be swapped in behind the same contract.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .raster import resize_bilinear, rgb_to_gray, rgb_to_hsl
from .sobel_prob import sobel_gradient
from .techniques import TECHNIQUES, run_all_selectable

MODEL_VERSION = 1
FEATURE_SIZE = 74
FALLBACK_TECHNIQUE = "Sobel_70"

# classifier defaults
LEARNING_RATE = 0.05
EPOCHS = 200
L2 = 1e-4
BATCH_SIZE = 32
TRAIN_SEED = 17
HELDOUT_FRACTION = 0.1

_FEATURE_LAYOUT = (
    "rescale299;"
    "thirds:rgb_mean+luma_std x3;"
    "hist:hue16,lightness16,gradlog16;"
    "rowprofile:blue_dominance8;"
    "global:sat_mean,sat_std,frac_l_gt_095,frac_s_lt_02,edge_density,top_row_luma"
)
FEATURE_SPEC_HASH = hashlib.sha256(_FEATURE_LAYOUT.encode()).hexdigest()[:16]

_GRAD_BIN_EDGES = np.concatenate(([0.0], np.geomspace(1.0, 1024.0, 16)))
_EDGE_DENSITY_THRESHOLD = 100.0


def extract_features(img: np.ndarray) -> np.ndarray:
    """74-dimensional scene descriptor, deterministic for any input size."""
    small = resize_bilinear(np.asarray(img, dtype=np.float64), 299, 299)
    h = 299

    feats = []
    # per-third RGB means and luminance std
    luma = rgb_to_gray(small)
    for lo, hi in ((0, h // 3), (h // 3, 2 * h // 3), (2 * h // 3, h)):
        band = small[lo:hi]
        feats.extend(band.reshape(-1, 3).mean(axis=0) / 255.0)
        feats.append(luma[lo:hi].std() / 255.0)

    hsl = rgb_to_hsl(small)
    hue, sat, lit = hsl[..., 0], hsl[..., 1], hsl[..., 2]
    feats.extend(np.histogram(hue, bins=16, range=(0.0, 1.0))[0] / hue.size)
    feats.extend(np.histogram(lit, bins=16, range=(0.0, 1.0))[0] / lit.size)

    mag = sobel_gradient(luma)
    gh = np.histogram(np.clip(mag, 0, _GRAD_BIN_EDGES[-1]), bins=_GRAD_BIN_EDGES)[0]
    feats.extend(gh / mag.size)

    blue = (small[..., 2] > small[..., 0]) & (small[..., 2] > small[..., 1])
    for lo in range(0, h - h % 8, h // 8):
        feats.append(blue[lo : lo + h // 8].mean())

    feats.append(sat.mean())
    feats.append(sat.std())
    feats.append((lit > 0.95).mean())
    feats.append((sat < 0.2).mean())
    feats.append((mag > _EDGE_DENSITY_THRESHOLD).mean())
    feats.append(luma[0].mean() / 255.0)

    out = np.asarray(feats, dtype=np.float64)
    assert out.shape == (FEATURE_SIZE,)
    return out


def best_technique(masks: dict[str, np.ndarray], truth: np.ndarray) -> str:
    """Highest pixel accuracy wins; ties break by designation order."""
    best_name, best_acc = None, -1.0
    for name in TECHNIQUES:
        mask = masks.get(name)
        acc = 0.0 if mask is None else float(np.mean(mask == truth))
        if acc > best_acc:
            best_name, best_acc = name, acc
    return best_name


def generate_labels(dataset, workers: int = 1) -> list[tuple[np.ndarray, str]]:
    """(features, best-technique) pairs for (image, truth-mask) inputs.

    A technique that raises on an image simply scores 0 for it.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("empty dataset")

    def one(item):
        img, truth = item
        masks = {}
        try:
            masks = run_all_selectable(img)
        except Exception:
            for name in TECHNIQUES:
                try:
                    from .techniques import run_technique

                    masks[name] = run_technique(name, img)
                except Exception:
                    pass
        return extract_features(img), best_technique(masks, np.asarray(truth, dtype=bool))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, dataset))
    return [one(item) for item in dataset]


@dataclass
class SelectorModel:
    weights: np.ndarray        # 13 x 75 (bias last)
    norm_mean: np.ndarray      # 74
    norm_std: np.ndarray       # 74, >0; masked dims carry std 1
    norm_mask: np.ndarray      # 74 bool, True = zero-variance dim (ignored)
    version: int = MODEL_VERSION
    seed: int = TRAIN_SEED
    feature_spec_hash: str = FEATURE_SPEC_HASH
    epoch_losses: list = field(default_factory=list)

    def normalize(self, f: np.ndarray) -> np.ndarray:
        z = (np.asarray(f, dtype=np.float64) - self.norm_mean) / self.norm_std
        z[self.norm_mask] = 0.0
        return z


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def train(
    labeled,
    learning_rate: float = LEARNING_RATE,
    epochs: int = EPOCHS,
    l2: float = L2,
    batch_size: int = BATCH_SIZE,
    seed: int = TRAIN_SEED,
) -> SelectorModel:
    """Mini-batch gradient descent on softmax cross-entropy + L2.

    Returns the epoch snapshot with the best top-1 accuracy on a held-out
    10% split drawn from the seed. Deterministic.
    """
    labeled = list(labeled)
    feats = np.stack([f for f, _ in labeled])
    names = [t for _, t in labeled]
    if len(set(names)) < 2:
        raise ValueError("need at least 2 distinct labels to train")
    y = np.array([TECHNIQUES.index(t) for t in names])

    mean = feats.mean(axis=0)
    std = feats.std(axis=0)
    mask = std <= 0
    std = np.where(mask, 1.0, std)
    z = (feats - mean) / std
    z[:, mask] = 0.0

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(labeled))
    n_held = max(1, int(round(HELDOUT_FRACTION * len(labeled))))
    held, rest = order[:n_held], order[n_held:]
    if rest.size == 0:
        rest = held

    x_tr = np.hstack([z[rest], np.ones((rest.size, 1))])
    y_tr = y[rest]
    x_hd = np.hstack([z[held], np.ones((held.size, 1))])
    y_hd = y[held]

    k = len(TECHNIQUES)
    w = np.zeros((k, FEATURE_SIZE + 1))
    best_w = w.copy()
    best_acc = -1.0
    losses = []

    for _ in range(epochs):
        perm = rng.permutation(len(x_tr))
        for start in range(0, len(perm), batch_size):
            idx = perm[start : start + batch_size]
            xb, yb = x_tr[idx], y_tr[idx]
            p = _softmax(xb @ w.T)
            p[np.arange(len(idx)), yb] -= 1.0
            grad = p.T @ xb / len(idx)
            grad[:, :-1] += l2 * w[:, :-1]
            w = w - learning_rate * grad

        p = _softmax(x_tr @ w.T)
        loss = -np.mean(np.log(p[np.arange(len(x_tr)), y_tr] + 1e-15))
        loss += 0.5 * l2 * np.sum(w[:, :-1] ** 2)
        losses.append(float(loss))

        acc = float(np.mean(np.argmax(x_hd @ w.T, axis=1) == y_hd))
        if acc > best_acc:
            best_acc = acc
            best_w = w.copy()

    if epochs == 0:
        best_w = w.copy()

    return SelectorModel(
        weights=best_w,
        norm_mean=mean,
        norm_std=std,
        norm_mask=mask,
        seed=seed,
        epoch_losses=losses,
    )


def predict_ranked(model: SelectorModel, f: np.ndarray) -> list[str]:
    """All 13 designations, best first; score ties break by table order."""
    x = np.append(model.normalize(f), 1.0)
    scores = model.weights @ x
    order = sorted(range(len(TECHNIQUES)), key=lambda i: (-scores[i], i))
    return [TECHNIQUES[i] for i in order]


def adaptive_mask(img: np.ndarray, model: SelectorModel) -> tuple[np.ndarray, str]:
    """Run only the rank-1 technique for this image; fall back to Sobel_70
    if it raises (errors from the fallback itself propagate)."""
    from .techniques import run_technique

    choice = predict_ranked(model, extract_features(img))[0]
    try:
        return run_technique(choice, img), choice
    except Exception:
        return run_technique(FALLBACK_TECHNIQUE, img), FALLBACK_TECHNIQUE


def save_model(model: SelectorModel, path) -> None:
    doc = {
        "version": model.version,
        "seed": model.seed,
        "feature_spec_hash": model.feature_spec_hash,
        "normalization": {
            "mean": model.norm_mean.tolist(),
            "std": model.norm_std.tolist(),
            "mask": model.norm_mask.astype(int).tolist(),
        },
        "weights": model.weights.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> SelectorModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    if doc.get("feature_spec_hash") != FEATURE_SPEC_HASH:
        raise ValueError("model was trained against a different feature layout")
    norm = doc["normalization"]
    return SelectorModel(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        norm_mean=np.asarray(norm["mean"], dtype=np.float64),
        norm_std=np.asarray(norm["std"], dtype=np.float64),
        norm_mask=np.asarray(norm["mask"], dtype=bool),
        seed=int(doc["seed"]),
    )
