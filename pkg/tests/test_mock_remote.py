import math

import numpy as np
import pytest
import requests

from surrokit.codec import CodecConfig, decode_scalar, encode_scalar, rel_error_bound
from surrokit.errors import ProtocolError, RemoteUnavailable, UnparseableOutput
from surrokit.metrics import correlations
from surrokit.prompts import PromptTemplate, render_metadata
from surrokit.problems import make_mcf_suite
from surrokit.surrogate import (
    DecodeSpec,
    ExactSurrogate,
    MockMetaModel,
    RemoteSurrogate,
    build_request,
    health,
    mock_serve,
    remote_predict,
    remote_predict_batch,
    smear_fraction,
)

CODEC = CodecConfig(gamma=10, k_min=-12, k_max=12)


@pytest.fixture(scope="module")
def tasks():
    return make_mcf_suite("MCF1")[:4]


@pytest.fixture(scope="module")
def noiseless_server(tasks):
    with mock_serve(tasks, noise_sigma_rel=0.0, codec=CODEC) as server:
        yield server


@pytest.fixture(scope="module")
def noisy_server(tasks):
    with mock_serve(tasks, noise_sigma_rel=0.1, seed=9, codec=CODEC) as server:
        yield server


class TestExactSurrogate:
    def test_identity_oracle(self, tasks):
        surr = ExactSurrogate(tasks)
        x = np.linspace(-1, 1, tasks[0].dim)
        assert surr.predict(tasks[0].metadata, x).y == tasks[0].evaluate(x)

    def test_batch_orders_preserved(self, tasks):
        surr = ExactSurrogate(tasks)
        xs = np.random.default_rng(0).uniform(-5, 5, (6, tasks[0].dim))
        preds = surr.predict_batch(tasks[0].metadata, xs)
        assert [p.y for p in preds] == pytest.approx(list(tasks[0].evaluate(xs)))


class TestMockModel:
    def test_zero_noise_is_codec_rounded_truth(self, tasks):
        model = MockMetaModel(tasks, noise_sigma_rel=0.0, codec=CODEC)
        x = np.linspace(-2, 2, tasks[0].dim)
        pred = model.predict(tasks[0].metadata, x)
        true = float(tasks[0].evaluate(x))
        assert abs(pred.y - true) <= abs(true) * rel_error_bound(CODEC.gamma)
        assert pred.raw_text == "[" + encode_scalar(true, CODEC).text() + "]"

    def test_zero_noise_greedy_exact_encoding(self, tasks):
        model = MockMetaModel(tasks, noise_sigma_rel=0.0, codec=CODEC)
        x = np.zeros(tasks[0].dim)
        pred = model.predict(tasks[0].metadata, x)
        truth = decode_scalar(encode_scalar(float(tasks[0].evaluate(x)), CODEC))
        assert pred.y == truth
        assert pred.uncertainty.ent == 0.0

    def test_noise_is_reproducible_per_request(self, tasks):
        model = MockMetaModel(tasks, noise_sigma_rel=0.2, codec=CODEC, seed=5)
        x = np.linspace(-1, 3, tasks[0].dim)
        a = model.predict(tasks[0].metadata, x)
        b = model.predict(tasks[0].metadata, x)
        assert a.y == b.y and a.raw_text == b.raw_text

    def test_smear_fraction_monotone(self):
        errs = [0.0, 1e-3, 1e-1, 1.0, 10.0, 1e4]
        qs = [smear_fraction(e) for e in errs]
        assert qs[0] == 0.0
        assert all(a < b for a, b in zip(qs, qs[1:]))
        assert qs[-1] < 1.0

    def test_entropy_tracks_injected_error(self, tasks):
        model = MockMetaModel(tasks, noise_sigma_rel=0.1, codec=CODEC, seed=2)
        meta_text = render_metadata(tasks[0].metadata, PromptTemplate.SMALL)
        rng = np.random.default_rng(0)
        ents, errors = [], []
        for _ in range(300):
            x = rng.uniform(-5, 5, tasks[0].dim)
            pred = model.answer(meta_text, x)
            ents.append(pred.uncertainty.ent)
            errors.append(abs(pred.y - float(tasks[0].evaluate(x))))
        rho = correlations(ents, errors).spearman
        assert rho > 0.5

    def test_beam_decode_returns_dispersion(self, tasks):
        model = MockMetaModel(tasks, noise_sigma_rel=0.1, codec=CODEC, seed=3)
        meta_text = render_metadata(tasks[0].metadata, PromptTemplate.SMALL)
        pred = model.answer(meta_text, np.ones(tasks[0].dim), decode=DecodeSpec(strategy="beam", width=3))
        assert pred.uncertainty.beam_std is not None
        assert pred.uncertainty.beam_std >= 0.0

    def test_unknown_metadata(self, tasks):
        model = MockMetaModel(tasks, codec=CODEC)
        with pytest.raises(KeyError):
            model.answer("nonsense metadata", np.zeros(5))


class TestWireProtocol:
    def test_health(self, noiseless_server):
        doc = health(noiseless_server.url)
        assert doc["status"] == "ok"
        assert isinstance(doc["model"], str)

    def test_remote_matches_in_process_byte_for_byte(self, tasks, noiseless_server):
        model = MockMetaModel(tasks, noise_sigma_rel=0.0, codec=CODEC)
        surr = RemoteSurrogate(endpoint=noiseless_server.url, gamma=CODEC.gamma)
        x = np.linspace(-4, 4, tasks[1].dim)
        local = model.predict(tasks[1].metadata, x)
        remote = surr.predict(tasks[1].metadata, x)
        assert remote.raw_text == local.raw_text
        assert remote.y == local.y

    def test_batch_order_preserved(self, tasks, noiseless_server):
        surr = RemoteSurrogate(endpoint=noiseless_server.url, gamma=CODEC.gamma)
        rng = np.random.default_rng(1)
        xs = rng.uniform(-5, 5, (8, tasks[0].dim))
        preds = surr.predict_batch(tasks[0].metadata, xs)
        singles = [surr.predict(tasks[0].metadata, x) for x in xs]
        assert [p.y for p in preds] == [s.y for s in singles]

    def test_step_probs_renormalized(self, tasks, noisy_server):
        surr = RemoteSurrogate(
            endpoint=noisy_server.url, gamma=CODEC.gamma, return_probs=True, top_k_probs=4
        )
        pred = surr.predict(tasks[0].metadata, np.ones(tasks[0].dim) * 0.5)
        assert pred.step_probs is not None
        for row in pred.step_probs:
            assert len(row) <= 4
            assert sum(p for _, p in row) == pytest.approx(1.0, abs=1e-6)

    def test_uncertainty_report_bounds(self, tasks, noisy_server):
        surr = RemoteSurrogate(endpoint=noisy_server.url, gamma=CODEC.gamma, return_probs=True)
        pred = surr.predict(tasks[0].metadata, np.full(tasks[0].dim, 1.5))
        rep = pred.uncertainty
        vocab_size = 6 + 2 + 10 + (CODEC.k_max - CODEC.k_min + 1)
        assert 0.0 <= rep.ent <= math.log(vocab_size)
        assert 0.0 <= rep.imsp <= 1.0
        assert 0.0 <= rep.itpm <= 1.0
        assert rep.nll >= 0.0

    def test_request_gamma_sets_output_precision(self, tasks, noiseless_server):
        x = np.ones(tasks[0].dim)
        for gamma in (6, 12):
            pred = RemoteSurrogate(endpoint=noiseless_server.url, gamma=gamma).predict(
                tasks[0].metadata, x
            )
            digit_count = len(pred.raw_text.strip("[]").split()) - 2
            assert digit_count == gamma

    def test_unknown_task_is_protocol_error(self, tasks, noiseless_server):
        req = build_request("no such task", [0.0] * 5, gamma=10)
        with pytest.raises(ProtocolError):
            remote_predict(noiseless_server.url, req)

    def test_malformed_request_is_400(self, noiseless_server):
        resp = requests.post(noiseless_server.url + "/predict", json={"x": [1.0]}, timeout=5)
        assert resp.status_code == 400
        resp = requests.post(
            noiseless_server.url + "/predict",
            data=b"{not json",
            headers={"Content-Type": "application/json"},
            timeout=5,
        )
        assert resp.status_code == 400

    def test_batch_carries_per_item_errors(self, tasks, noiseless_server):
        good = build_request(
            render_metadata(tasks[0].metadata, PromptTemplate.SMALL),
            [0.0] * tasks[0].dim,
            gamma=10,
        )
        bad = build_request("no such task", [0.0] * 5, gamma=10)
        out = remote_predict_batch(noiseless_server.url, [good, bad])
        assert not isinstance(out[0], dict)
        assert isinstance(out[1], dict) and out[1]["status"] == 404

    def test_unreachable_endpoint(self):
        surr = RemoteSurrogate(endpoint="http://127.0.0.1:9", gamma=10, timeout=0.5)
        meta = make_mcf_suite("MCF1")[0].metadata
        with pytest.raises(RemoteUnavailable):
            surr.predict(meta, np.zeros(5))

    def test_env_var_override(self, tasks, noiseless_server, monkeypatch):
        monkeypatch.setenv("SURROKIT_REMOTE_URL", noiseless_server.url)
        surr = RemoteSurrogate(gamma=CODEC.gamma)
        pred = surr.predict(tasks[0].metadata, np.zeros(tasks[0].dim))
        assert math.isfinite(pred.y)

    def test_missing_env_and_endpoint(self, monkeypatch):
        monkeypatch.delenv("SURROKIT_REMOTE_URL", raising=False)
        with pytest.raises(RemoteUnavailable):
            RemoteSurrogate()


class TestDecodeStrategiesOverWire:
    @pytest.mark.parametrize("strategy", ["greedy", "beam", "top_k", "top_p", "temperature"])
    def test_all_strategies_served(self, tasks, noisy_server, strategy):
        surr = RemoteSurrogate(
            endpoint=noisy_server.url,
            gamma=CODEC.gamma,
            decode=DecodeSpec(strategy=strategy, width=3, k=3, p=0.95, t=0.5, seed=11),
        )
        try:
            pred = surr.predict(tasks[0].metadata, np.full(tasks[0].dim, -0.5))
        except UnparseableOutput:
            # Stochastic strategies may legitimately sample a degenerate
            # generation (e.g. a leading zero); the server answers 422.
            assert strategy in ("top_k", "top_p", "temperature")
            return
        assert math.isfinite(pred.y)
        assert pred.raw_text.startswith("[")

    def test_degenerate_generation_maps_to_422(self, tasks, noisy_server):
        surr = RemoteSurrogate(
            endpoint=noisy_server.url,
            gamma=CODEC.gamma,
            decode=DecodeSpec(strategy="temperature", t=25.0, seed=0),
        )
        raised = 0
        for seed in range(12):
            surr.decode = DecodeSpec(strategy="temperature", t=25.0, seed=seed)
            try:
                surr.predict(tasks[0].metadata, np.full(tasks[0].dim, -0.5))
            except UnparseableOutput:
                raised += 1
        assert raised > 0

    def test_greedy_equals_beam_width_one(self, tasks, noisy_server):
        x = np.full(tasks[0].dim, 2.0)
        greedy = RemoteSurrogate(
            endpoint=noisy_server.url, gamma=CODEC.gamma, decode=DecodeSpec(strategy="greedy")
        ).predict(tasks[0].metadata, x)
        beam1 = RemoteSurrogate(
            endpoint=noisy_server.url, gamma=CODEC.gamma,
            decode=DecodeSpec(strategy="beam", width=1),
        ).predict(tasks[0].metadata, x)
        assert greedy.raw_text == beam1.raw_text
