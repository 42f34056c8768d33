import numpy as np
import pytest

from netgov import nets
from netgov.nets import (
    AdamState,
    CheckpointError,
    DenseNet,
    DivergenceError,
    Layer,
    ShapeError,
    adam_init,
    adam_step,
    dense_net,
    forward,
    grad,
    load_checkpoint,
    save_checkpoint,
)


def layer(w, b, act):
    return Layer(np.asarray(w, dtype=np.float32), np.asarray(b, dtype=np.float32), act)


def eval_f64(arch, params, x):
    """Independent forward pass on an explicit float64 parameter list."""
    h = np.asarray(x, dtype=np.float64)
    for (w, b), spec in zip(params, arch):
        z = w @ h + b
        if spec["act"] == "relu":
            h = np.maximum(z, 0.0)
        elif spec["act"] == "tanh":
            h = np.tanh(z)
        elif spec["act"] == "sigmoid":
            h = 1.0 / (1.0 + np.exp(-z))
        else:
            h = z
    return h


def loss_f64(arch, params, x, kind, target):
    y = eval_f64(arch, params, x)
    if kind == "mse":
        return np.sum((y - target) ** 2)
    if kind == "bce":
        p = np.clip(y, 1e-7, 1 - 1e-7)
        return -np.sum(target * np.log(p) + (1 - target) * np.log1p(-p))
    return float(y[0])


class TestForward:
    def test_zero_weights_return_bias(self):
        net = DenseNet([layer(np.zeros((2, 3)), [0.5, -1.5], "identity")])
        out = forward(net, np.array([3.0, -7.0, 2.0]))
        assert np.array_equal(out, [0.5, -1.5])

    def test_identity_layer(self):
        net = DenseNet([layer(np.eye(2), [0.0, 0.0], "identity")])
        assert np.array_equal(forward(net, np.array([1.0, 2.0])), [1.0, 2.0])

    def test_two_layer_relu_matches_hand_evaluation(self):
        # fixture values chosen exactly representable in float32
        w1 = np.array([[1.0, 2.0], [-0.5, 0.25], [3.0, -1.0]])
        b1 = np.array([0.125, -0.25, 0.375])
        w2 = np.array([[1.0, -1.0, 0.5]])
        b2 = np.array([-0.0625])
        net = DenseNet([layer(w1, b1, "relu"), layer(w2, b2, "identity")])
        x = np.array([1.0, -1.0])
        # oracle: explicit matrix arithmetic, no shared code path
        h = np.maximum(w1 @ x + b1, 0.0)
        expect = w2 @ h + b2
        assert np.allclose(forward(net, x), expect, rtol=0, atol=1e-12)

    def test_batched_forward_matches_loop(self):
        net = dense_net([3, 5, 2], ["relu", "tanh"], seed=7)
        xs = np.random.default_rng(1).normal(size=(4, 3))
        batched = forward(net, xs)
        for i in range(4):
            # batched BLAS may reorder accumulation; allow last-ulp slack
            assert np.allclose(batched[i], forward(net, xs[i]), rtol=1e-13, atol=0)

    def test_dimension_mismatch_names_layer(self):
        net = dense_net([3, 2], ["identity"], seed=0)
        with pytest.raises(ShapeError, match="layer 0"):
            forward(net, np.zeros(4))

    def test_chained_dims_validated(self):
        with pytest.raises(ShapeError, match="layer 1"):
            DenseNet([layer(np.zeros((2, 3)), np.zeros(2), "relu"),
                      layer(np.zeros((1, 4)), np.zeros(1), "identity")])


class TestGrad:
    def test_zero_at_loss_minimum(self):
        # mse against the net's own output sits at the stationary point
        net = dense_net([2, 4, 3], ["relu", "identity"], seed=3)
        x = np.array([0.3, -1.2])
        g = grad(net, x, "mse", forward(net, x))
        for dw, db in g.layers:
            assert np.all(dw == 0.0) and np.all(db == 0.0)
        assert np.all(g.wrt_input == 0.0)

    def test_linear_scalar_input_gradient_is_weight_row(self):
        net = DenseNet([layer([[0.7, -2.0, 0.1]], [0.0], "identity")])
        g = grad(net, np.array([1.0, 2.0, 3.0]), "scalar-output")
        assert np.array_equal(g.wrt_input, net.layers[0].weight[0].astype(np.float64))

    @pytest.mark.parametrize("act", ["relu", "tanh", "sigmoid", "identity"])
    @pytest.mark.parametrize("kind", ["mse", "bce", "scalar-output"])
    def test_matches_central_finite_differences(self, act, kind):
        rng = np.random.default_rng(hash((act, kind)) % 2**32)
        out_dim = 1 if kind == "scalar-output" else 2
        head = "sigmoid" if kind == "bce" else "identity"
        net = dense_net([2, 3, out_dim], [act, head], seed=int(rng.integers(2**31)))
        for lay in net.layers:  # break the zero-bias symmetry
            lay.bias[:] = rng.normal(scale=0.3, size=lay.bias.shape).astype(np.float32)
        x = rng.normal(size=2)
        if act == "relu":
            # keep pre-activations away from the kink
            z = net.layers[0].weight.astype(np.float64) @ x + net.layers[0].bias
            while np.min(np.abs(z)) < 1e-2:
                x = rng.normal(size=2)
                z = net.layers[0].weight.astype(np.float64) @ x + net.layers[0].bias
        target = rng.uniform(0.1, 0.9, size=out_dim) if kind != "scalar-output" else None
        g = grad(net, x, kind, target)

        arch = net.architecture()
        params = [(l.weight.astype(np.float64), l.bias.astype(np.float64))
                  for l in net.layers]
        h = 1e-5

        def check(analytic, fd):
            assert abs(analytic - fd) <= 1e-4 * max(abs(analytic), abs(fd), 1e-4)

        for k, (w, b) in enumerate(params):
            for idx in np.ndindex(w.shape):
                w[idx] += h
                up = loss_f64(arch, params, x, kind, target)
                w[idx] -= 2 * h
                dn = loss_f64(arch, params, x, kind, target)
                w[idx] += h
                check(g.layers[k][0][idx], (up - dn) / (2 * h))
            for idx in range(b.size):
                b[idx] += h
                up = loss_f64(arch, params, x, kind, target)
                b[idx] -= 2 * h
                dn = loss_f64(arch, params, x, kind, target)
                b[idx] += h
                check(g.layers[k][1][idx], (up - dn) / (2 * h))
        for idx in range(x.size):
            xp = x.copy()
            xp[idx] += h
            up = loss_f64(arch, params, xp, kind, target)
            xp[idx] -= 2 * h
            dn = loss_f64(arch, params, xp, kind, target)
            check(g.wrt_input[idx], (up - dn) / (2 * h))

    def test_bce_target_out_of_range_rejected(self):
        net = dense_net([2, 1], ["sigmoid"], seed=0)
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            grad(net, np.zeros(2), "bce", np.array([1.5]))


class TestAdam:
    def one_param_net(self, value=0.0):
        return DenseNet([layer([[value]], [0.0], "identity")])

    def test_zero_gradient_keeps_params(self):
        net = dense_net([2, 3], ["relu"], seed=1)
        before = nets.flat_params(net).copy()
        g = grad(net, np.zeros(2), "mse", forward(net, np.zeros(2)))
        st = adam_init(net)
        adam_step(net, g, st)
        assert st.t == 1
        assert np.array_equal(nets.flat_params(net), before)

    def test_first_step_closed_form(self):
        # g=1 with fresh state: delta = -lr * 1 / (sqrt(1) + eps)
        net = self.one_param_net(0.25)
        st = adam_init(net, lr=1e-3)
        g = nets.Gradients([(np.array([[1.0]]), np.array([0.0]))], np.zeros(1))
        adam_step(net, g, st)
        delta = float(net.layers[0].weight[0, 0]) - 0.25
        assert delta == pytest.approx(-1e-3 / (1.0 + 1e-8), abs=1e-7)

    def test_second_step_no_larger(self):
        # hand-evaluated recurrence: with g=1 both bias-corrected moments stay 1
        net = self.one_param_net(0.0)
        st = adam_init(net, lr=1e-3)
        g = nets.Gradients([(np.array([[1.0]]), np.array([0.0]))], np.zeros(1))
        adam_step(net, g, st)
        d1 = abs(float(net.layers[0].weight[0, 0]))
        adam_step(net, g, st)
        d2 = abs(float(net.layers[0].weight[0, 0])) - d1
        assert st.t == 2
        assert d2 <= d1 * (1 + 1e-6)

    def test_nonfinite_update_aborts(self):
        net = self.one_param_net(0.0)
        st = adam_init(net)
        g = nets.Gradients([(np.array([[np.inf]]), np.array([0.0]))], np.zeros(1))
        with pytest.raises(DivergenceError, match="layer 0"):
            adam_step(net, g, st)

    def test_training_is_deterministic(self):
        def run():
            net = dense_net([3, 4, 1], ["tanh", "identity"], seed=11)
            st = adam_init(net, lr=1e-2)
            rng = np.random.default_rng(5)
            for _ in range(20):
                x = rng.normal(size=3)
                adam_step(net, grad(net, x, "mse", np.array([1.0])), st)
            return nets.flat_params(net)

        assert np.array_equal(run(), run())


class TestCheckpoint:
    def test_round_trip_bit_identical(self, tmp_path):
        net = dense_net([4, 8, 3], ["relu", "sigmoid"], seed=42)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, str(p))
        loaded = load_checkpoint(str(p))
        x = np.random.default_rng(0).normal(size=4)
        assert np.array_equal(forward(net, x), forward(loaded, x))
        assert loaded.architecture() == net.architecture()

    def test_truncated_payload_rejected(self, tmp_path):
        net = dense_net([4, 2], ["identity"], seed=0)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, str(p))
        blob = p.read_bytes()
        p.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(CheckpointError):
            load_checkpoint(str(p))

    def test_version_bump_rejected(self, tmp_path):
        net = dense_net([2, 2], ["identity"], seed=0)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, str(p))
        blob = bytearray(p.read_bytes())
        blob[8:10] = (99).to_bytes(2, "little")
        # keep CRC consistent so the version check itself is what trips
        blob[-4:] = nets.zlib.crc32(bytes(blob[:-4])).to_bytes(4, "little")
        p.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(str(p))

    def test_corrupted_byte_fails_checksum(self, tmp_path):
        net = dense_net([2, 2], ["identity"], seed=0)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, str(p))
        blob = bytearray(p.read_bytes())
        blob[20] ^= 0xFF
        p.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="checksum"):
            load_checkpoint(str(p))
