import numpy as np
import pytest

from motionstream.codec.model import init_params
from motionstream.codec import default_music_config
from motionstream.music import (
    FEATURE_WIDTH,
    extract_envelope_onsets,
    load_music_features,
    parse_music_text,
    save_music_features,
    tokenize_music,
)
from motionstream.rotations import quat_from_yaw, quat_rotate
from motionstream.trajectory import (
    load_trajectory,
    root_displacement,
    save_trajectory,
    tokenize_trajectory,
)
from motionstream.vocab import (
    DELIMITER_WORDS,
    EOM,
    MOTION_START,
    SOM,
    TRAJ_START,
    VOCAB_TOTAL,
    build_text_vocab,
    detokenize_text,
    from_global,
    load_text_vocab,
    save_text_vocab,
    to_global,
    tokenize_text,
)


class TestRootDisplacement:
    def test_identity_rotation(self):
        r = root_displacement([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], np.array([1.0, 0.0, 0.0, 0.0]))
        assert np.allclose(r, [1.0, 2.0, 3.0])

    def test_zero_displacement(self):
        r = root_displacement([5.0, 5.0, 5.0], [5.0, 5.0, 5.0], np.eye(3))
        assert np.allclose(r, 0.0)

    def test_yaw_90(self):
        # previous frame faces +y; world displacement (1,0,0) is to its right
        r = root_displacement([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], quat_from_yaw(np.pi / 2))
        assert np.allclose(r, [0.0, -1.0, 0.0], atol=1e-12)

    def test_orientation_invariance(self, rng):
        p_prev = rng.normal(size=3)
        p_i = rng.normal(size=3)
        q = quat_from_yaw(0.7)
        base = root_displacement(p_i, p_prev, q)
        g = quat_from_yaw(2.1)  # global rotation applied to everything
        r2 = root_displacement(quat_rotate(g, p_i), quat_rotate(g, p_prev), np.array(np.matmul(_mat(g), _mat(q))))
        assert np.allclose(base, r2, atol=1e-12)


def _mat(q):
    from motionstream.rotations import quat_to_mat

    return quat_to_mat(q)


def straight_path(n=26, fps=5.0, speed=1.0):
    t = np.arange(n) / fps
    pos = np.stack([speed * t, np.zeros(n), np.zeros(n)], axis=1)
    quat = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    return pos, quat, fps


class TestTrajectoryTokens:
    def test_straight_line_all_30(self):
        pos, quat, fps = straight_path()
        tokens = tokenize_trajectory(pos, quat, fps)
        assert len(tokens) == 25
        assert all(t == 30 for t in tokens)

    def test_u_turn_token_0(self):
        # heading flips by exactly -180 degrees between segments
        pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        quat = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        tokens = tokenize_trajectory(pos, quat, 5.0)
        assert tokens == [30, 0]

    def test_near_180_token_59(self):
        a = np.radians(179.9)
        pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0 + np.cos(a), np.sin(a), 0.0]])
        quat = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        tokens = tokenize_trajectory(pos, quat, 5.0)
        assert tokens == [30, 59]

    def test_standing_still_carries_heading(self):
        pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        quat = np.tile([1.0, 0.0, 0.0, 0.0], (4, 1))
        tokens = tokenize_trajectory(pos, quat, 5.0)
        assert all(t == 30 for t in tokens)

    def test_too_short(self):
        with pytest.raises(ValueError):
            tokenize_trajectory(np.zeros((1, 3)), np.array([[1.0, 0, 0, 0]]), 5.0)

    def test_rigid_invariance(self, rng):
        n = 40
        t = np.arange(n) / 5.0
        pos = np.stack([np.cos(0.3 * t) * 3, np.sin(0.3 * t) * 3, np.zeros(n)], axis=1)
        quat = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
        base = tokenize_trajectory(pos, quat, 5.0)
        g = quat_from_yaw(1.234)
        pos2 = quat_rotate(g[None, :], pos) + np.array([4.0, -2.0, 0.0])
        from motionstream.rotations import quat_mul

        quat2 = quat_mul(g[None, :], quat)
        assert tokenize_trajectory(pos2, quat2, 5.0) == base

    def test_sampling_density_invariance(self):
        # same path sampled at 10 and 50 Hz tokenizes identically after 5 FPS resampling
        def path(fps, dur=5.0):
            t = np.arange(int(dur * fps) + 1) / fps
            pos = np.stack([np.cos(0.4 * t), np.sin(0.4 * t), np.zeros_like(t)], axis=1) * 2
            quat = np.tile([1.0, 0.0, 0.0, 0.0], (len(t), 1))
            return pos, quat

        p10, q10 = path(10.0)
        p50, q50 = path(50.0)
        assert tokenize_trajectory(p10, q10, 10.0) == tokenize_trajectory(p50, q50, 50.0)

    def test_file_roundtrip(self, tmp_path):
        pos, quat, fps = straight_path(8)
        f = tmp_path / "p.traj"
        save_trajectory(pos, quat, fps, f)
        pos2, quat2, fps2 = load_trajectory(f)
        assert fps2 == fps
        assert np.array_equal(pos2, pos)


class TestMusic:
    def test_silence(self):
        frames = extract_envelope_onsets(np.zeros(16000), 16000)
        assert frames.shape[1] == FEATURE_WIDTH
        assert np.all(frames[:, 0] == 0.0)
        assert np.all(frames[:, 34] == 0.0)

    def test_click_at_one_second(self):
        sr = 16000
        pcm = np.zeros(2 * sr)
        pcm[sr : sr + 40] = 1.0
        frames = extract_envelope_onsets(pcm, sr)
        onsets = np.where(frames[:, 34] > 0)[0]
        assert len(onsets) == 1
        assert abs(onsets[0] - 30) <= 1

    def test_constant_tone(self):
        sr = 16000
        t = np.arange(2 * sr) / sr
        pcm = 0.5 * np.sin(2 * np.pi * 440 * t)
        frames = extract_envelope_onsets(pcm, sr)
        env = frames[:, 0]
        assert np.all(np.abs(env[1:-1] - env[1]) < 0.02)  # constant envelope
        assert np.all(frames[1:, 34] == 0.0)  # stationary spectrum: zero flux after frame 0

    def test_empty_input(self):
        assert extract_envelope_onsets(np.zeros(0), 16000).shape == (0, FEATURE_WIDTH)

    def test_low_sample_rate_rejected(self):
        with pytest.raises(ValueError):
            extract_envelope_onsets(np.zeros(100), 4000)

    def test_tokenize_length_contract(self, rng):
        cfg = default_music_config(hidden_channels=16, group_norm_groups=4)
        codec = init_params(cfg, seed=0)
        frames = np.zeros((60, FEATURE_WIDTH))
        frames[:, 0] = rng.random(60)
        toks = tokenize_music(frames, codec)
        assert len(toks) == 30
        assert np.array_equal(toks, tokenize_music(frames, codec))
        assert toks.max() < 6144

    def test_untrained_codec_rejected(self):
        with pytest.raises(ValueError):
            tokenize_music(np.zeros((4, FEATURE_WIDTH)), None)

    def test_feature_file_roundtrip(self, tmp_path, rng):
        frames = np.zeros((5, FEATURE_WIDTH))
        frames[:, 0] = rng.random(5)
        frames[:, 33] = [0, 1, 0, 1, 0]
        f = tmp_path / "m.music"
        save_music_features(frames, f)
        back = load_music_features(f)
        assert np.array_equal(back, frames)
        assert parse_music_text(f.read_text()).shape == frames.shape

    def test_binary_flags_validated(self):
        bad = np.zeros((2, FEATURE_WIDTH))
        bad[0, 34] = 0.5
        with pytest.raises(ValueError):
            save_music_features(bad, "/tmp/never.music")


class TestVocab:
    def test_table_boundaries(self):
        assert to_global("motion", 0) == 130_079
        assert to_global("trajectory", 59) == 151_642
        assert from_global(130_078) == ("eom", 0)
        assert from_global(130_077) == ("som", 0)
        assert to_global("music", 0) == 145_439
        assert to_global("text", 130_076) == 130_076

    def test_full_range_inverse(self):
        for gid in range(0, VOCAB_TOTAL, 997):
            modality, local = from_global(gid)
            assert to_global(modality, local) == gid
        assert from_global(VOCAB_TOTAL - 1) == ("trajectory", 59)
        with pytest.raises(ValueError):
            from_global(VOCAB_TOTAL)

    def test_local_range_checked(self):
        with pytest.raises(ValueError):
            to_global("trajectory", 60)
        with pytest.raises(ValueError):
            to_global("motion", 15_360)

    def test_som_eom_values(self):
        assert SOM == 130_077 and EOM == 130_078 and MOTION_START == 130_079 and TRAJ_START == 151_583


class TestText:
    def test_empty_string(self):
        vocab = build_text_vocab(["walk run"])
        assert tokenize_text("", vocab) == []

    def test_known_word_stable(self):
        vocab = build_text_vocab(["walk walk run", "walk forward"])
        a = tokenize_text("walk", vocab)
        assert a == tokenize_text("walk", vocab)
        assert a[0] != 0

    def test_unknown_is_zero(self):
        vocab = build_text_vocab(["walk"])
        assert tokenize_text("xyzzy", vocab) == [0]

    def test_detokenize_identity_in_vocab(self):
        vocab = build_text_vocab(["walk forward and wave"])
        ids = tokenize_text("wave and walk", vocab)
        assert tokenize_text(detokenize_text(ids, vocab), vocab) == ids

    def test_punct_split(self):
        vocab = build_text_vocab(["walk, run! stop."])
        assert tokenize_text("Walk, RUN.", vocab) == [vocab.words["walk"], vocab.words["run"]]

    def test_vocab_file_roundtrip(self, tmp_path):
        vocab = build_text_vocab(["walk run jump walk run walk"])
        f = tmp_path / "v.vocab"
        save_text_vocab(vocab, f)
        back = load_text_vocab(f)
        assert back.words == vocab.words
        # delimiters sit at their reserved tail ids
        for w, i in DELIMITER_WORDS.items():
            assert back.words[w] == i
