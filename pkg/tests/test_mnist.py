import gzip
import struct

import numpy as np
import pytest

from ca_reservoir import experiments as ex
from ca_reservoir.errors import ConsistencyError, FormatError
from ca_reservoir.mnist import IMAGES_MAGIC, LABELS_MAGIC, load_mnist_idx

from conftest import make_rng


def write_idx(tmp_path, pixels, labels, image_magic=IMAGES_MAGIC, label_magic=LABELS_MAGIC,
              label_count=None, gz=False):
    count, rows, cols = pixels.shape
    img = struct.pack(">IIII", image_magic, count, rows, cols) + pixels.astype(np.uint8).tobytes()
    lab = struct.pack(">II", label_magic, label_count if label_count is not None else len(labels))
    lab += np.asarray(labels, dtype=np.uint8).tobytes()
    suffix = ".gz" if gz else ""
    ip = tmp_path / f"images.idx{suffix}"
    lp = tmp_path / f"labels.idx{suffix}"
    if gz:
        ip.write_bytes(gzip.compress(img))
        lp.write_bytes(gzip.compress(lab))
    else:
        ip.write_bytes(img)
        lp.write_bytes(lab)
    return str(ip), str(lp)


class TestLoader:
    def test_roundtrip_and_threshold(self, tmp_path):
        pixels = np.array(
            [[[0, 127, 128], [255, 1, 200], [128, 0, 0]]], dtype=np.uint8
        )
        ip, lp = write_idx(tmp_path, pixels, [7])
        bits, labels = load_mnist_idx(ip, lp, threshold=128)
        assert labels.tolist() == [7]
        # value 128 maps to 1 (>= comparison)
        assert bits[0].tolist() == [0, 0, 1, 1, 0, 1, 1, 0, 0]

    def test_uniform_zero_image(self, tmp_path):
        pixels = np.zeros((2, 3, 3), dtype=np.uint8)
        ip, lp = write_idx(tmp_path, pixels, [0, 1])
        bits, _ = load_mnist_idx(ip, lp)
        assert bits.sum() == 0

    def test_gzip_transparent(self, tmp_path):
        pixels = np.full((1, 2, 2), 200, dtype=np.uint8)
        ip, lp = write_idx(tmp_path, pixels, [3], gz=True)
        bits, labels = load_mnist_idx(ip, lp)
        assert bits.sum() == 4 and labels[0] == 3

    def test_bad_images_magic_named(self, tmp_path):
        pixels = np.zeros((1, 2, 2), dtype=np.uint8)
        ip, lp = write_idx(tmp_path, pixels, [0], image_magic=0x00000911)
        with pytest.raises(FormatError, match="0x00000911"):
            load_mnist_idx(ip, lp)

    def test_bad_labels_magic(self, tmp_path):
        pixels = np.zeros((1, 2, 2), dtype=np.uint8)
        ip, lp = write_idx(tmp_path, pixels, [0], label_magic=0x00000100)
        with pytest.raises(FormatError):
            load_mnist_idx(ip, lp)

    def test_count_mismatch(self, tmp_path):
        pixels = np.zeros((2, 2, 2), dtype=np.uint8)
        ip, lp = write_idx(tmp_path, pixels, [0, 1], label_count=3)
        with pytest.raises(ConsistencyError):
            load_mnist_idx(ip, lp)


class TestMnistKernelExperiment:
    def test_synthetic_smoke(self):
        rng = make_rng(110)
        # class-structured synthetic "digits": 4 classes with distinct masks
        n = 49
        per = 110
        images = []
        labels = []
        for cls in range(4):
            mask = np.zeros(n)
            mask[cls * 12 : cls * 12 + 12] = 0.8
            block = (rng.random((per, n)) < (0.05 + mask)).astype(np.uint8)
            images.append(block)
            labels += [cls] * per
        images = np.concatenate(images)
        labels = np.array(labels)
        order = rng.permutation(len(labels))
        rep = ex.run_mnist_kernel_experiment(
            images[order], labels[order], iters=2, perms=8, master_seed=3,
            n_train=200, n_test=200,
        )
        assert 0.0 <= rep.metrics["ca_accuracy"] <= 1.0
        assert 0.0 <= rep.metrics["linear_accuracy"] <= 1.0
        assert rep.metrics["dot_pearson"] > 0.5  # structured data, should correlate

    def test_requires_enough_instances(self):
        from ca_reservoir.errors import ParameterError

        with pytest.raises(ParameterError):
            ex.run_mnist_kernel_experiment(
                np.zeros((100, 9), dtype=np.uint8), np.zeros(100, dtype=int)
            )
