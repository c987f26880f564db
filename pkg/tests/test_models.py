import numpy as np
import pytest

from conftest import smooth_image
from survx.errors import EmptyDataset, UnsupportedFactor, WeightMismatch
from survx.image import ImageTensor, rgb_to_ycbcr, ycbcr_to_rgb
from survx.models import (
    EspcnConfig,
    ImageTooSmallWarning,
    TrainConfig,
    bicubic_upscale,
    build_espcn,
    build_srgan_discriminator,
    build_srgan_generator,
    extract_training_patches,
    init_espcn_weights,
    load_bundle,
    patch_strides,
    random_inference_weights,
    save_bundle,
    train_espcn,
    upscale,
)
from survx.net import forward
from survx.resample import resize_array, resize_to


class TestEspcnBuilder:
    def test_r4_shape_law(self, rng):
        cfg = EspcnConfig(r=4, input_mode="luma")
        spec = build_espcn(cfg)
        weights = init_espcn_weights(spec, seed=5)
        (out,) = forward(spec, weights, rng.random((1, 64, 64)))
        assert out.shape == (1, 256, 256)

    def test_r1_preserves_dims(self, rng):
        spec = build_espcn(EspcnConfig(r=1))
        weights = init_espcn_weights(spec, seed=0)
        (out,) = forward(spec, weights, rng.random((1, 13, 19)))
        assert out.shape == (1, 13, 19)

    def test_parameter_count_r3_luma(self):
        spec = build_espcn(EspcnConfig(r=3, input_mode="luma"))
        weights = init_espcn_weights(spec, seed=0)
        total = sum(v.size for v in weights.values())
        assert total == (1 * 64 * 25 + 64) + (64 * 32 * 9 + 32) + (32 * 9 * 9 + 9) == 22729

    def test_rgb_mode_channels(self, rng):
        spec = build_espcn(EspcnConfig(r=2, input_mode="rgb"))
        weights = init_espcn_weights(spec, seed=0)
        (out,) = forward(spec, weights, rng.random((3, 10, 10)))
        assert out.shape == (3, 20, 20)

    @pytest.mark.parametrize("dims", [(17, 17), (20, 31)])
    def test_shape_law_property(self, dims, rng):
        spec = build_espcn(EspcnConfig(r=3))
        weights = init_espcn_weights(spec, seed=1)
        (out,) = forward(spec, weights, rng.random((1, *dims)))
        assert out.shape == (1, 3 * dims[0], 3 * dims[1])


class TestSrganBuilders:
    def test_two_shuffles_at_r4(self):
        spec = build_srgan_generator(residual_blocks=4, r=4)
        shuffles = [n for n in spec.nodes if n.op_kind == "pixel_shuffle"]
        assert len(shuffles) == 2 and all(n.params["r"] == 2 for n in shuffles)

    def test_one_shuffle_at_r2(self):
        spec = build_srgan_generator(residual_blocks=2, r=2)
        assert sum(n.op_kind == "pixel_shuffle" for n in spec.nodes) == 1

    def test_bad_factor(self):
        with pytest.raises(UnsupportedFactor):
            build_srgan_generator(4, r=3)

    def test_residual_adds_skip_to_block_input(self):
        spec = build_srgan_generator(residual_blocks=3, r=2)
        entries = {0: "head_act", 1: "block0.add", 2: "block1.add"}
        for i, entry in entries.items():
            add = spec.node(f"block{i}.add")
            assert add.inputs[1] == entry

    def test_node_count_closed_form(self):
        b, r = 16, 4
        spec = build_srgan_generator(residual_blocks=b, r=r)
        expected = 2 + 6 * b + 3 + 3 * int(np.log2(r)) + 1
        assert len(spec.nodes) == expected

    def test_generator_runs(self, rng):
        spec = build_srgan_generator(residual_blocks=1, r=2)
        weights = random_inference_weights(spec, seed=0)
        (out,) = forward(spec, weights, rng.random((3, 12, 12)))
        assert out.shape == (3, 24, 24)

    def test_discriminator_channel_sequence(self):
        spec = build_srgan_discriminator()
        convs = [n.params["out_channels"] for n in spec.nodes if n.op_kind == "conv2d"]
        assert convs == [64, 64, 128, 128, 256, 256, 512, 512]

    def test_discriminator_dense_stage_dims(self):
        spec = build_srgan_discriminator(input_size=96)
        fc1 = spec.node("fc1")
        assert fc1.params["features_in"] == 512 * 6 * 6

    def test_discriminator_probability_range(self, rng):
        spec = build_srgan_discriminator(input_size=32)
        weights = random_inference_weights(spec, seed=3)
        (p,) = forward(spec, weights, rng.random((3, 32, 32)))
        assert p.shape == (1, 1, 1)
        assert 0.0 < p[0, 0, 0] < 1.0


class TestPatchExtraction:
    def test_stride_formula(self):
        assert patch_strides((5, 3, 3), 2) == (14, 28)
        assert patch_strides((5, 3, 3), 4) == (14, 56)
        assert patch_strides((4, 2, 2), 3) == (17, 51)

    def test_exact_patch_image(self, rng):
        r = 3
        hr = ImageTensor(rng.random((1, 17 * r, 17 * r)))
        pairs = extract_training_patches(hr, r)
        assert len(pairs) == 1
        lr, hrp = pairs[0]
        assert (lr.height, lr.width) == (17, 17)
        assert (hrp.height, hrp.width) == (17 * r, 17 * r)

    def test_constant_image_constant_patches(self):
        hr = ImageTensor(np.full((1, 34 * 2, 34 * 2), 0.6))
        for lr, hrp in extract_training_patches(hr, 2):
            assert lr.data == pytest.approx(np.full((1, 17, 17), 0.6), abs=1e-12)

    def test_too_small_warns_and_empty(self, rng):
        hr = ImageTensor(rng.random((1, 20, 20)))
        with pytest.warns(ImageTooSmallWarning):
            assert extract_training_patches(hr, 2) == []

    def test_patches_align_with_full_lr(self, rng):
        r = 2
        hr = ImageTensor(rng.random((1, 17 * r + 14 * r, 17 * r + 14 * r)))
        lr_full = resize_to(hr, hr.height // r, hr.width // r, antialias=True)
        pairs = extract_training_patches(hr, r)
        assert len(pairs) == 4
        stride_lr, stride_hr = patch_strides((5, 3, 3), r)
        positions = [(0, 0), (0, stride_lr), (stride_lr, 0), (stride_lr, stride_lr)]
        for (py, px), (lr, hrp) in zip(positions, pairs):
            assert np.array_equal(lr.data, lr_full.data[:, py:py + 17, px:px + 17])
            hy, hx = py * r, px * r
            assert np.array_equal(hrp.data, hr.data[:, hy:hy + 34, hx:hx + 34])


def tiny_patch_set(n=6, r=2, seed=0):
    img = smooth_image(seed=seed, channels=1, height=17 * r * 2, width=17 * r * 3)
    pairs = extract_training_patches(img, r)
    return pairs[:n]


class TestTrainer:
    def test_loss_decreases_and_logs(self):
        pairs = tiny_patch_set()
        cfg = TrainConfig(seed=0, max_epochs=30, batch_size=8)
        weights, log = train_espcn(pairs, cfg, EspcnConfig(r=2))
        assert len(log) <= 30
        assert log[-1].loss < log[0].loss
        best = np.minimum.accumulate([e.loss for e in log])
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))

    def test_learning_rate_floor(self):
        pairs = tiny_patch_set()
        cfg = TrainConfig(seed=0, max_epochs=60, improvement_threshold_mu=1.0)
        # mu = 1.0 forces a decay every epoch; the floor must hold
        _, log = train_espcn(pairs, cfg, EspcnConfig(r=2))
        assert all(e.learning_rate >= cfg.lr_final for e in log)
        assert log[-1].learning_rate == pytest.approx(cfg.lr_final)

    def test_deterministic(self):
        pairs = tiny_patch_set()
        cfg = TrainConfig(seed=7, max_epochs=5)
        w1, log1 = train_espcn(pairs, cfg, EspcnConfig(r=2))
        w2, log2 = train_espcn(pairs, cfg, EspcnConfig(r=2))
        assert [e.loss for e in log1] == [e.loss for e in log2]
        for k in w1:
            assert np.array_equal(w1[k], w2[k])

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            train_espcn([], TrainConfig(), EspcnConfig(r=2))

    def test_adam_variant_runs(self):
        pairs = tiny_patch_set(n=4)
        cfg = TrainConfig(seed=0, max_epochs=5, optimizer="adam", lr_initial=0.001, lr_final=0.0001)
        _, log = train_espcn(pairs, cfg, EspcnConfig(r=2))
        assert len(log) == 5


class TestUpscale:
    def test_dims_r4(self, rng):
        cfg = EspcnConfig(r=4)
        spec = build_espcn(cfg)
        weights = init_espcn_weights(spec, seed=2)
        img = ImageTensor(rng.random((1, 64, 64)))
        out = upscale(img, spec, weights, 4, "luma")
        assert (out.height, out.width) == (256, 256)

    def test_zero_weights_zero_output(self, rng):
        cfg = EspcnConfig(r=2)
        spec = build_espcn(cfg)
        weights = {k: np.zeros_like(v) for k, v in init_espcn_weights(spec, 0).items()}
        img = ImageTensor(rng.random((1, 8, 8)))
        out = upscale(img, spec, weights, 2, "luma")
        assert np.array_equal(out.data, np.zeros((1, 16, 16)))

    def test_luma_mode_chroma_is_bicubic(self):
        # mid-range ycbcr input and a constant-0.5 network output keep every
        # value inside gamut, so the chroma path is exactly the bicubic one
        rng = np.random.default_rng(11)
        y = 0.35 + 0.3 * rng.random((8, 8))
        cb = 0.5 + 0.05 * (rng.random((8, 8)) - 0.5)
        cr = 0.5 + 0.05 * (rng.random((8, 8)) - 0.5)
        img = ycbcr_to_rgb(np.stack([y, cb, cr]))
        spec = build_espcn(EspcnConfig(r=2))
        weights = {k: np.zeros_like(v) for k, v in init_espcn_weights(spec, 0).items()}
        weights["conv3.bias"] = np.full(4, 0.5)
        out = upscale(img, spec, weights, 2, "luma")
        got_chroma = rgb_to_ycbcr(out)[1:3]
        expected = resize_array(rgb_to_ycbcr(img)[1:3], 16, 16, antialias=False)
        assert got_chroma == pytest.approx(expected, abs=1e-12)

    def test_rgb_mode(self, rng):
        spec = build_espcn(EspcnConfig(r=2, input_mode="rgb"))
        weights = init_espcn_weights(spec, seed=1)
        img = ImageTensor(rng.random((3, 9, 9)))
        out = upscale(img, spec, weights, 2, "rgb")
        assert out.data.shape == (3, 18, 18)

    def test_weight_mismatch(self, rng):
        spec = build_espcn(EspcnConfig(r=2))
        with pytest.raises(WeightMismatch):
            upscale(ImageTensor(rng.random((1, 8, 8))), spec, {}, 2, "luma")

    def test_bicubic_upscale_dims(self, rng):
        img = ImageTensor(rng.random((3, 10, 11)))
        out = bicubic_upscale(img, 4)
        assert (out.height, out.width) == (40, 44)


class TestBundles:
    def test_roundtrip(self, tmp_path, rng):
        spec = build_espcn(EspcnConfig(r=2))
        weights = init_espcn_weights(spec, seed=9)
        weights = {k: v.astype(np.float32).astype(np.float64) for k, v in weights.items()}
        stem = tmp_path / "model"
        save_bundle(stem, spec, weights, r=2, input_mode="luma")
        bundle = load_bundle(stem)
        assert bundle.r == 2 and bundle.input_mode == "luma"
        assert bundle.spec.to_json() == spec.to_json()
        for k in weights:
            assert np.array_equal(bundle.weights[k], weights[k])

    def test_load_by_either_suffix(self, tmp_path):
        spec = build_espcn(EspcnConfig(r=2))
        weights = init_espcn_weights(spec, seed=0)
        save_bundle(tmp_path / "m", spec, weights, r=2)
        assert load_bundle(tmp_path / "m.json").r == 2
        assert load_bundle(tmp_path / "m.nnwb").r == 2
