"""Config-driven experiment runner.

Subcommands: ``codes``, ``ber-sweep``, ``train-decoder``, ``rrd-eval``,
``ldbp-sim``, ``ldbp-train``, ``filter-design``. Each reads a TOML config,
writes CSV results plus a metadata echo of the fully resolved configuration,
and exits 0 on success (nonzero with a diagnostic otherwise). Every CSV row
carries the derived seed that reproduces it.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import codes, ldbp, train, wbp
from .wbp import RrdConfig, WeightSet

_CHUNK_FRAMES = 1024


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_metadata(cfg: dict, out_dir: Path, extra: dict | None = None) -> None:
    lines = []
    flat = dict(cfg)
    if extra:
        flat = {**flat, "run": extra}
    for section, table in flat.items():
        if isinstance(table, dict):
            lines.append(f"[{section}]")
            for key, value in table.items():
                lines.append(f"{key} = {_toml_scalar(value)}")
            lines.append("")
        else:
            lines.append(f"{section} = {_toml_scalar(table)}")
    (out_dir / "metadata.toml").write_text("\n".join(lines) + "\n")


def _point_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def wilson_interval(errors: int, total: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return 0.0, 1.0
    p = errors / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


# ---------------------------------------------------------------------------
# Code / decoder resolution
# ---------------------------------------------------------------------------


def _resolve_matrix(code_cfg: dict) -> codes.BinaryMatrix:
    source = code_cfg.get("source", "bch")
    if source == "alist":
        return codes.read_alist(code_cfg["alist_path"])
    if source != "bch":
        raise ValueError(f"unknown code source {source!r}")
    n = int(code_cfg.get("n", 63))
    k = int(code_cfg.get("k", 36))
    h = codes.bch_parity_check(n, k)
    if code_cfg.get("variant", "standard") == "cycle-reduced":
        h = codes.reduce_cycles(
            h, seed=int(code_cfg.get("cr_seed", 7)), budget=int(code_cfg.get("cr_budget", 2000))
        )
    return h


def _resolve_decoder(dec_cfg: dict, graph: codes.TannerGraph):
    """Returns (decode_fn llr->hard bits, total_iterations, description)."""
    kind = dec_cfg.get("kind", "bp")
    llr_clip = float(dec_cfg.get("llr_clip", 15.0))
    if kind == "bp":
        weights = WeightSet.plain(
            int(dec_cfg.get("iterations", 20)),
            damping=float(dec_cfg.get("damping", 1.0)),
            llr_clip=llr_clip,
        )
        return (
            lambda llr: wbp.decode(llr, graph, weights).hard_decisions,
            weights.iterations,
            f"bp(T={weights.iterations},damping={dec_cfg.get('damping', 1.0)})",
        )
    if kind == "checkpoint":
        weights = train.load_weightset(dec_cfg["checkpoint"])
        return (
            lambda llr: wbp.decode(llr, graph, weights).hard_decisions,
            weights.iterations,
            f"checkpoint({dec_cfg['checkpoint']})",
        )
    if kind == "rrd":
        iters_per_perm = int(dec_cfg.get("iterations_per_permutation", 2))
        weights = WeightSet.plain(iters_per_perm, llr_clip=llr_clip)
        rrd = RrdConfig(
            num_blocks=int(dec_cfg.get("blocks", 10)),
            mixing=float(dec_cfg.get("mixing", 0.3)),
            iterations_per_permutation=iters_per_perm,
            damping=float(dec_cfg.get("rrd_damping", 0.9)),
            permutation_seed=int(dec_cfg.get("permutation_seed", 0)),
        )
        return (
            lambda llr: wbp.rrd_decode(llr, graph, weights, rrd).hard_decisions,
            rrd.num_blocks * iters_per_perm,
            f"rrd(blocks={rrd.num_blocks},mixing={rrd.mixing},damping={rrd.damping})",
        )
    raise ValueError(f"unknown decoder kind {kind!r}")


# ---------------------------------------------------------------------------
# BER simulation
# ---------------------------------------------------------------------------


def _simulate_point(
    generator_rows: np.ndarray,
    decode_fn,
    ebn0_db: float,
    rate: float,
    min_bit_errors: int,
    max_frames: int,
    seed: int,
    data_source: str = "random-codewords",
    noise_variance_override: float | None = None,
) -> dict:
    rng = np.random.default_rng(seed)
    k, n = generator_rows.shape
    sigma2 = (
        noise_variance_override
        if noise_variance_override is not None
        else 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))
    )
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive (use a small override)")
    frames = bits = bit_errors = frame_errors = 0
    while frames < max_frames and bit_errors < min_bit_errors:
        batch = min(_CHUNK_FRAMES, max_frames - frames)
        if data_source == "random-codewords":
            info = rng.integers(0, 2, size=(batch, k))
            cw = (info @ generator_rows) % 2
        else:
            cw = np.zeros((batch, n), dtype=np.int64)
        noise = rng.normal(0.0, math.sqrt(sigma2), size=(batch, n))
        llr = 2.0 * ((1.0 - 2.0 * cw) + noise) / sigma2
        hard = decode_fn(llr)
        wrong = hard != cw
        bit_errors += int(wrong.sum())
        frame_errors += int(wrong.any(axis=1).sum())
        frames += batch
        bits += batch * n
    lo, hi = wilson_interval(bit_errors, bits)
    return dict(
        ebn0_db=ebn0_db,
        frames=frames,
        bits=bits,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / bits,
        fer=frame_errors / frames,
        ci95_low=lo,
        ci95_high=hi,
        seed=seed,
    )


_BER_COLUMNS = [
    "ebn0_db", "frames", "bits", "bit_errors", "frame_errors",
    "ber", "fer", "ci95_low", "ci95_high", "seed",
]


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def run_ber_sweep(cfg: dict, out_dir: Path, seed: int) -> list[dict]:
    """Monte-Carlo BER/FER at each configured Eb/N0 with the stopping rule
    (min bit errors reached, or the frame cap)."""
    matrix = _resolve_matrix(cfg.get("code", {}))
    graph = codes.build_tanner(matrix)
    generator_rows = codes.gf2_nullspace(matrix.bits)
    rate = generator_rows.shape[0] / matrix.cols
    decode_fn, _, desc = _resolve_decoder(cfg.get("decoder", {}), graph)
    sweep = cfg.get("sweep", {})
    grid = sorted(float(x) for x in sweep.get("ebn0_db", [4.0]))
    if not grid:
        raise ValueError("empty SNR grid")
    rows = []
    for i, point in enumerate(grid):
        row = _simulate_point(
            generator_rows,
            decode_fn,
            point,
            rate,
            int(sweep.get("min_bit_errors", 300)),
            int(sweep.get("max_frames", 1_000_000)),
            _point_seed(seed, i),
            data_source=sweep.get("data_source", "random-codewords"),
            noise_variance_override=sweep.get("noise_variance_override"),
        )
        rows.append(row)
        print(f"{desc} Eb/N0={point:g} dB: BER={row['ber']:.3e} ({row['bit_errors']} errors)")
    _write_csv(out_dir / "ber.csv", _BER_COLUMNS, rows)
    return rows


def run_rrd_eval(cfg: dict, out_dir: Path, seed: int) -> list[dict]:
    """BER of the permuted-cascade decoder next to plain BP at equal total
    iteration count, same schema as the BER sweep plus a decoder column."""
    matrix = _resolve_matrix(cfg.get("code", {}))
    graph = codes.build_tanner(matrix)
    generator_rows = codes.gf2_nullspace(matrix.bits)
    rate = generator_rows.shape[0] / matrix.cols
    sweep = cfg.get("sweep", {})
    grid = sorted(float(x) for x in sweep.get("ebn0_db", [4.0]))
    rrd_fn, total_iters, rrd_desc = _resolve_decoder(
        {**cfg.get("decoder", {}), "kind": "rrd"}, graph
    )
    bp_fn, _, bp_desc = _resolve_decoder({"kind": "bp", "iterations": total_iters}, graph)
    rows = []
    for label, fn in (("rrd", rrd_fn), ("bp", bp_fn)):
        for i, point in enumerate(grid):
            row = _simulate_point(
                generator_rows, fn, point, rate,
                int(sweep.get("min_bit_errors", 300)),
                int(sweep.get("max_frames", 1_000_000)),
                _point_seed(seed, i if label == "rrd" else 10_000 + i),
                data_source=sweep.get("data_source", "random-codewords"),
            )
            row["decoder"] = label
            rows.append(row)
            print(f"{label} Eb/N0={point:g}: BER={row['ber']:.3e}")
    _write_csv(out_dir / "rrd_eval.csv", ["decoder"] + _BER_COLUMNS, rows)
    return rows


# ---------------------------------------------------------------------------
# Decoder training
# ---------------------------------------------------------------------------


def _weights_from_config(dec_cfg: dict, graph: codes.TannerGraph) -> WeightSet:
    mode = dec_cfg.get("mode", "simple-scaled")
    iterations = int(dec_cfg.get("iterations", 20))
    damping = float(dec_cfg.get("damping_init", 0.5))
    train_damping = bool(dec_cfg.get("train_damping", True))
    llr_clip = float(dec_cfg.get("llr_clip", 15.0))
    sharing = bool(dec_cfg.get("temporal_sharing", True))
    if mode == "plain":
        return WeightSet.plain(iterations, damping=damping,
                               damping_trainable=train_damping, llr_clip=llr_clip)
    if mode == "simple-scaled":
        return WeightSet.simple_scaled(iterations, temporal_sharing=sharing,
                                       damping=damping, damping_trainable=train_damping,
                                       llr_clip=llr_clip)
    if mode == "fully-weighted":
        return WeightSet.fully_weighted(graph, iterations, temporal_sharing=sharing,
                                        damping=damping, damping_trainable=train_damping,
                                        llr_clip=llr_clip)
    raise ValueError(f"unknown decoder mode {mode!r}")


def run_training(cfg: dict, out_dir: Path, seed: int) -> Path:
    """Train a decoder per the config; writes checkpoint.txt and loss_log.csv."""
    matrix = _resolve_matrix(cfg.get("code", {}))
    graph = codes.build_tanner(matrix)
    initial = _weights_from_config(cfg.get("decoder", {}), graph)
    tcfg_raw = cfg.get("training", {})
    tcfg = train.TrainConfig(
        optimizer=tcfg_raw.get("optimizer", "rmsprop"),
        learning_rate=float(tcfg_raw.get("learning_rate", 1e-3)),
        rmsprop_decay=float(tcfg_raw.get("rmsprop_decay", 0.9)),
        rmsprop_epsilon=float(tcfg_raw.get("rmsprop_epsilon", 1e-8)),
        batch_size=int(tcfg_raw.get("batch_size", 100)),
        minibatches_per_epoch=int(tcfg_raw.get("minibatches_per_epoch", 1000)),
        epochs=int(tcfg_raw.get("epochs", 20)),
        snr_range_db=(
            float(tcfg_raw.get("snr_low_db", 1.0)),
            float(tcfg_raw.get("snr_high_db", 6.0)),
        ),
        grad_clip_norm=float(tcfg_raw.get("grad_clip_norm", 0.1)),
        clip_style=tcfg_raw.get("clip_style", "norm"),
        llr_clip=float(tcfg_raw.get("llr_clip", 15.0)),
        loss_type=tcfg_raw.get("loss_type", "modified"),
        loss_scope=tcfg_raw.get("loss_scope", "multi"),
        data_source=tcfg_raw.get("data_source", "random-codewords"),
        seed=seed,
    )
    trained, log = train.train_decoder(graph, initial, tcfg)
    ckpt = out_dir / "checkpoint.txt"
    train.save_weightset(trained, ckpt)
    train.write_loss_log(log, out_dir / "loss_log.csv")
    if log:
        print(f"trained {tcfg.epochs}x{tcfg.minibatches_per_epoch} minibatches; "
              f"loss {log[0].loss:.5f} -> {log[-1].loss:.5f}")
    return ckpt


# ---------------------------------------------------------------------------
# Fiber experiments
# ---------------------------------------------------------------------------


def _link_from_config(link_cfg: dict) -> ldbp.LinkConfig:
    fiber = ldbp.FiberParams(
        beta2=float(link_cfg.get("beta2_ps2_km", -21.7)) * 1e-27,
        gamma_nl=float(link_cfg.get("gamma_per_w_km", 1.3)) * 1e-3,
        alpha=float(link_cfg.get("alpha_db_km", 0.2)) * math.log(10.0) / 10.0 / 1e3,
        span_length=float(link_cfg.get("span_km", 80.0)) * 1e3,
        num_spans=int(link_cfg.get("spans", 25)),
        amp_noise_figure_db=float(link_cfg.get("noise_figure_db", 4.5)),
        amplification=link_cfg.get("amplification", "edfa"),
    )
    return ldbp.LinkConfig(
        fiber=fiber,
        modulation=link_cfg.get("modulation", "16QAM"),
        symbol_rate=float(link_cfg.get("symbol_rate_gbd", 10.7)) * 1e9,
        rolloff=float(link_cfg.get("rolloff", 0.1)),
        sim_oversampling=int(link_cfg.get("sim_oversampling", 4)),
        eq_oversampling=int(link_cfg.get("eq_oversampling", 2)),
        sim_steps_per_span=int(link_cfg.get("sim_steps_per_span", 50)),
    )


def _effective_snr_for(link: ldbp.LinkConfig, equalized: ldbp.ComplexSignal,
                       symbols: np.ndarray, skip: int) -> float:
    est = ldbp.receive_symbols(equalized, link.rolloff)
    window = slice(skip, len(symbols) - skip)
    return ldbp.effective_snr(est[window], symbols[window])


def run_ldbp_experiment(cfg: dict, out_dir: Path, seed: int) -> list[dict]:
    """Effective-SNR sweep over launch power for the configured equalizers.
    The DBP-FFT reference runs at the full simulation rate (before the
    receiver decimation), where its nonlinear steps are accurate."""
    link = _link_from_config(cfg.get("link", {}))
    grid_cfg = cfg.get("grid", {})
    powers = [float(p) for p in grid_cfg.get("launch_powers_dbm", [-2, 0, 2, 4, 6])]
    burst = int(grid_cfg.get("burst_symbols", 4096))
    skip = int(grid_cfg.get("skip_symbols", 192))
    methods = grid_cfg.get("methods", ["linear", "dbp-fft", "repeated-ls", "repeated-fds", "ldbp"])
    taps_per_step = int(grid_cfg.get("taps_per_step", 5))
    dbp_steps = int(grid_cfg.get("dbp_steps_per_span", 4))
    bank_ls = ldbp.make_filter_bank(link.fiber, 1, taps_per_step, "LS",
                                    link.eq_sample_rate, bandwidth=1.0)
    bank_fds = ldbp.make_filter_bank(link.fiber, 1, taps_per_step, "FDS", link.eq_sample_rate)
    bank_trained = None
    if "ldbp" in methods:
        bank_path = cfg.get("ldbp", {}).get("bank")
        if not bank_path:
            raise ValueError("method 'ldbp' needs [ldbp].bank pointing at a trained bank file")
        bank_trained = ldbp.load_filter_bank(bank_path)
    rows = []
    taps_total = bank_ls.num_steps * taps_per_step
    for i, power in enumerate(powers):
        point_seed = _point_seed(seed, i)
        entropy = np.random.SeedSequence(point_seed).spawn(2)
        tx, symbols = ldbp.generate_waveform(
            burst, link.modulation, link.rolloff, link.sim_oversampling,
            seed=entropy[0], symbol_rate=link.symbol_rate,
        )
        power_w = 1e-3 * 10.0 ** (power / 10.0)
        tx_scaled = ldbp.ComplexSignal(tx.samples * math.sqrt(power_w),
                                       tx.sample_rate, tx.symbol_rate)
        rx_full = ldbp.ssfm_propagate(tx_scaled, link.fiber, link.sim_steps_per_span,
                                      seed=entropy[1])
        rx = (
            ldbp.resample(rx_full, link.eq_oversampling)
            if link.eq_oversampling != link.sim_oversampling
            else rx_full
        )
        outputs = {}
        if "linear" in methods:
            outputs["linear"] = (_effective_snr_for(
                link, ldbp.equalize_linear(rx, link.fiber), symbols, skip), 0)
        if "dbp-fft" in methods:
            backprop = ldbp.dbp_frequency_domain(rx_full, link.fiber, dbp_steps)
            if link.eq_oversampling != link.sim_oversampling:
                backprop = ldbp.resample(backprop, link.eq_oversampling)
            outputs["dbp-fft"] = (_effective_snr_for(link, backprop, symbols, skip), 0)
        if "repeated-ls" in methods:
            outputs["repeated-ls"] = (_effective_snr_for(
                link, ldbp.ldbp_apply(rx, bank_ls), symbols, skip), taps_total)
        if "repeated-fds" in methods:
            outputs["repeated-fds"] = (_effective_snr_for(
                link, ldbp.ldbp_apply(rx, bank_fds), symbols, skip), taps_total)
        if bank_trained is not None:
            outputs["ldbp"] = (_effective_snr_for(
                link, ldbp.ldbp_apply(rx, bank_trained), symbols, skip),
                bank_trained.num_steps * bank_trained.taps_per_step)
        for method, (snr, ntaps) in outputs.items():
            rows.append(dict(launch_power_dbm=power, method=method,
                             taps_total=ntaps, effective_snr_db=snr, seed=point_seed))
        print(f"P={power:+.1f} dBm: " + "  ".join(
            f"{m}={v[0]:.2f}dB" for m, v in outputs.items()))
    _write_csv(out_dir / "ldbp_sweep.csv",
               ["launch_power_dbm", "method", "taps_total", "effective_snr_db", "seed"], rows)
    return rows


def run_ldbp_training(cfg: dict, out_dir: Path, seed: int) -> Path:
    """Pretrain the cascade initializer and train the taps end to end;
    writes bank.txt and loss_log.csv."""
    link = _link_from_config(cfg.get("link", {}))
    tcfg_raw = cfg.get("ldbp_training", {})
    taps_per_step = int(tcfg_raw.get("taps_per_step", 5))
    init_kind = tcfg_raw.get("init", "pretrained")
    if init_kind == "pretrained":
        bank0 = ldbp.pretrain_cascade_bank(
            link.fiber, 1, taps_per_step, link.eq_sample_rate,
            band_fraction=link.signal_bandwidth_fraction, seed=seed,
        )
    elif init_kind == "repeated-ls":
        bank0 = ldbp.make_filter_bank(link.fiber, 1, taps_per_step, "LS",
                                      link.eq_sample_rate, bandwidth=1.0)
    else:
        raise ValueError(f"unknown init {init_kind!r}")
    cfg_train = ldbp.LdbpTrainConfig(
        iterations=int(tcfg_raw.get("iterations", 400)),
        optimizer=tcfg_raw.get("optimizer", "rmsprop"),
        learning_rate=float(tcfg_raw.get("learning_rate", 3e-4)),
        burst_symbols=int(tcfg_raw.get("burst_symbols", 1024)),
        launch_power_dbm=float(tcfg_raw.get("launch_power_dbm", 2.0)),
        skip_symbols=int(tcfg_raw.get("skip_symbols", 128)),
        train_steps_per_span=tcfg_raw.get("train_steps_per_span", 20),
        seed=seed,
    )
    bank, losses = ldbp.train_ldbp(link, bank0, cfg_train)
    path = out_dir / "bank.txt"
    ldbp.save_filter_bank(bank, path)
    with open(out_dir / "loss_log.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss"])
        for i, loss in enumerate(losses):
            writer.writerow([i, repr(loss)])
    print(f"tap training: loss {losses[0]:.5f} -> {losses[-1]:.5f}; bank at {path}")
    return path


def run_filter_design(cfg: dict, out_dir: Path, seed: int) -> Path:
    fcfg = cfg.get("filter", {})
    taps = ldbp.design_fir(
        method=fcfg.get("method", "LS"),
        num_taps=int(fcfg.get("taps", 15)),
        step_delta=float(fcfg.get("span_km", 80.0)) * 1e3 / int(fcfg.get("steps_per_span", 1)),
        beta2=float(fcfg.get("beta2_ps2_km", -21.7)) * 1e-27,
        sample_rate=float(fcfg.get("sample_rate_ghz", 21.4)) * 1e9,
        bandwidth=float(fcfg.get("bandwidth", 1.0)),
        max_out_of_band_gain=fcfg.get("max_out_of_band_gain"),
    )
    path = out_dir / "taps.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re", "im"])
        for i, tap in enumerate(taps):
            writer.writerow([i - (len(taps) - 1) // 2, repr(tap.real), repr(tap.imag)])
    print(f"designed {len(taps)}-tap {fcfg.get('method', 'LS')} filter -> {path}")
    return path


def run_codes(cfg: dict, out_dir: Path, seed: int) -> None:
    ccfg = cfg.get("codes", {})
    action = ccfg.get("action", "build")
    matrix = _resolve_matrix(ccfg)
    if action == "count":
        print(f"4-cycles: {codes.count_4cycles(matrix)}")
        return
    if action == "reduce":
        before = codes.count_4cycles(matrix)
        matrix = codes.reduce_cycles(matrix, seed=seed, budget=int(ccfg.get("budget", 2000)))
        print(f"4-cycles: {before} -> {codes.count_4cycles(matrix)}")
    out_name = ccfg.get("out_alist", "h.alist")
    codes.write_alist(matrix, out_dir / out_name)
    print(f"wrote {out_dir / out_name} ({matrix.rows}x{matrix.cols}, {matrix.num_edges} ones)")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_RUNNERS = {
    "codes": run_codes,
    "ber-sweep": run_ber_sweep,
    "train-decoder": run_training,
    "rrd-eval": run_rrd_eval,
    "ldbp-sim": run_ldbp_experiment,
    "ldbp-train": run_ldbp_training,
    "filter-design": run_filter_design,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="commlearn",
        description="Trainable BP decoding and learned digital backpropagation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(
            cfg.get("experiment", {}).get("seed", 0)
        )
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_metadata(cfg, out_dir, extra={"command": args.command, "seed": seed})
        _RUNNERS[args.command](cfg, out_dir, seed)
    except Exception as exc:  # surface a diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
