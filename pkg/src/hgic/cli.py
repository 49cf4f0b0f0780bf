"""Command-line entry points.

Subcommands: run, replay, train, eval, validate-mapping, send, bridge,
gen-dataset, gen-keypoints. Headless runs perform no socket operations;
--live adds the UDP listeners, telemetry publishing, and real-time pacing.
HGIC_LOG_LEVEL controls logging (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import threading
import time
from importlib import resources

logger = logging.getLogger(__name__)


def _setup_logging() -> None:
    level = os.environ.get("HGIC_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _resolve_scenario(name_or_path: str) -> str:
    if os.path.exists(name_or_path):
        return name_or_path
    bundled = resources.files("hgic.data.scenarios").joinpath(
        name_or_path.replace("-", "_") + ".json"
    )
    if bundled.is_file():
        return str(bundled)
    raise SystemExit(f"error: scenario {name_or_path!r} not found (not a file or bundled name)")


def bundled_scenarios() -> list[str]:
    files = resources.files("hgic.data.scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def cmd_run(args) -> int:
    from .engine import SimulationEngine
    from .scenario import ScenarioError, load_scenario

    try:
        scenario = load_scenario(_resolve_scenario(args.scenario), seed_override=args.seed)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    recognizer = None
    if args.static_model:
        from .converter import default_mapping, load_mapping
        from .gesture.mlp import ClassifierModel
        from .recognizer import GestureRecognizer

        rules = load_mapping(args.mapping) if args.mapping else default_mapping()
        recognizer = GestureRecognizer(
            static_model=ClassifierModel.load(args.static_model),
            dynamic_model=ClassifierModel.load(args.dynamic_model) if args.dynamic_model else None,
            rules=rules,
        )

    engine = SimulationEngine(scenario, recognizer=recognizer)
    publisher = None
    listeners = []
    if args.live:
        from .netio import CommandListener, KeypointListener, TelemetryPublisher

        cmd_listener = CommandListener(engine, port=args.command_port)
        cmd_listener.start()
        listeners.append(cmd_listener)
        if recognizer is not None:
            kp_listener = KeypointListener(engine, port=args.keypoint_port)
            kp_listener.start()
            listeners.append(kp_listener)
        publisher = TelemetryPublisher((args.peer, args.telemetry_port))
        print(
            f"live: commands :{cmd_listener.port}, telemetry -> "
            f"{args.peer}:{args.telemetry_port}, {len(engine.world.uavs)} UAVs",
            flush=True,
        )

    stop_event = threading.Event()
    try:
        metrics = engine.run(
            out_dir=args.out_dir,
            live=args.live,
            rate_hz=args.rate,
            publisher=publisher,
            speed=args.speed,
            stop_event=stop_event,
        )
    except KeyboardInterrupt:
        stop_event.set()
        print("interrupted, logs flushed", file=sys.stderr)
        return 130
    finally:
        for listener in listeners:
            listener.stop()
        if publisher is not None:
            publisher.close()
    print(json.dumps({k: v for k, v in metrics.items() if k != "transitions"}, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    from .netproto import Kind, WireMessage, encode, now_ms
    from .trajlog import read_trajectory, recompute_metrics

    try:
        rows = read_trajectory(args.log)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = recompute_metrics(rows, d_col=args.d_col)

    if args.live:
        import socket

        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        by_tick: dict[int, list] = {}
        for r in rows:
            by_tick.setdefault(r.tick, []).append(r)
        ticks = sorted(by_tick)
        dt = (by_tick[ticks[1]][0].t - by_tick[ticks[0]][0].t) if len(ticks) > 1 else 0.02
        every = max(1, int(round(1.0 / (args.rate * dt))))
        start = time.monotonic()
        seq = 0
        for k, tick in enumerate(ticks):
            if k % every:
                continue
            group = by_tick[tick]
            seq += 1
            msg = WireMessage(
                kind=Kind.TELEMETRY,
                seq=seq,
                ts_ms=now_ms(),
                payload={
                    "tick": tick,
                    "t": group[0].t,
                    "size": len(group),
                    "mode": "navigation",
                    "formation": None,
                    "collisions": 0,
                    "uavs": [
                        {"id": r.id, "p": list(r.position), "v": list(r.velocity), "g": r.group}
                        for r in group
                    ],
                    "echo": None,
                    "gesture": None,
                },
            )
            for datagram in encode(msg):
                sock.sendto(datagram, (args.peer, args.telemetry_port))
            target = start + (tick - ticks[0]) * dt / args.speed
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        sock.close()
    else:
        # Honor the requested pacing even without network output so replay
        # wall-clock scales with --speed.
        duration = rows[-1].t - rows[0].t
        time.sleep(duration / args.speed if args.speed > 0 else 0.0)

    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_train(args) -> int:
    from .gesture.datasets import load_dataset_csv
    from .gesture.mlp import TrainConfig, evaluate, train

    try:
        dataset = load_dataset_csv(args.dataset)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = TrainConfig()
    if args.config:
        with open(args.config) as f:
            doc = json.load(f)
        known = set(TrainConfig.__dataclass_fields__)
        bad = set(doc) - known
        if bad:
            print(f"error: unknown training config keys {sorted(bad)}", file=sys.stderr)
            return 2
        if "hidden" in doc:
            doc["hidden"] = tuple(doc["hidden"])
        cfg = TrainConfig(**doc)
    model = train(dataset, cfg)
    model.save(args.out)
    report = evaluate(model, dataset).to_dict()
    report["validation_accuracy"] = model.training["validation_accuracy"]
    report["model"] = args.out
    if args.report:
        with open(args.report, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    from .gesture.datasets import load_dataset_csv
    from .gesture.mlp import ClassifierModel, evaluate

    try:
        model = ClassifierModel.load(args.model)
        dataset = load_dataset_csv(args.dataset)
        report = evaluate(model, dataset).to_dict()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.report:
        with open(args.report, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_validate_mapping(args) -> int:
    from .converter import MappingError, load_mapping

    try:
        rules = load_mapping(args.mapping)
    except MappingError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_local = sum(len(b) for b in rules.modes.values())
    print(
        f"ok: {len(rules.global_bindings)} global, {len(rules.mode_switch)} mode-switch, "
        f"{n_local} mode-local bindings"
    )
    return 0


def cmd_send(args) -> int:
    import socket

    from .netproto import Kind, WireMessage, encode, now_ms

    commands: list[dict]
    if args.file:
        with open(args.file) as f:
            commands = json.load(f)
        if not isinstance(commands, list):
            print("error: command file must be a JSON array", file=sys.stderr)
            return 2
    else:
        if not args.verb:
            print("error: need --verb or --file", file=sys.stderr)
            return 2
        payload = {"verb": args.verb, "args": json.loads(args.args)}
        if args.mode:
            payload["mode"] = args.mode
        commands = [payload]

    from .commands import VERB_MODE, Verb, scope_for

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.settimeout(1.0)
    seq = args.seq
    for entry in commands:
        verb = Verb(entry["verb"])
        payload = {
            "verb": verb.value,
            "mode": entry.get("mode", VERB_MODE[verb].value),
            "scope": entry.get("scope", scope_for(verb).value),
            "args": entry.get("args", {}),
        }
        for _ in range(args.repeat):
            msg = WireMessage(kind=Kind.COMMAND, seq=seq, payload=payload, ts_ms=now_ms())
            sock.sendto(encode(msg)[0], (args.host, args.port))
        try:
            data, _ = sock.recvfrom(4096)
            print(data.decode())
        except socket.timeout:
            print(f"seq {seq}: no ack (controller down or port wrong)", file=sys.stderr)
        seq += 1
    sock.close()
    return 0


def cmd_bridge(args) -> int:
    from .netio import Bridge

    host, _, port = args.controller.partition(":")
    bridge = Bridge(
        controller_addr=(host or "127.0.0.1", int(port or 47801)),
        telemetry_port=args.telemetry_port,
        ws_port=args.ws_port,
    )
    bridge.start()
    print(
        f"bridge: udp telemetry :{bridge.telemetry_port} <-> ws :{bridge.ws_port}, "
        f"commands -> {bridge.controller_addr[0]}:{bridge.controller_addr[1]}",
        flush=True,
    )
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        bridge.stop()
    return 0


def cmd_gen_dataset(args) -> int:
    from .gesture.datasets import save_dataset_csv
    from .gesture.synth import (
        ALL_DYNAMIC_CLASSES,
        STATIC_CLASSES,
        make_dynamic_dataset,
        make_static_dataset,
    )

    if args.kind == "static":
        classes = STATIC_CLASSES[: args.classes] if args.classes else None
        dataset = make_static_dataset(classes, n_per_class=args.per_class, seed=args.seed)
    else:
        classes = ALL_DYNAMIC_CLASSES[: args.classes] if args.classes else None
        dataset = make_dynamic_dataset(classes, n_per_class=args.per_class, seed=args.seed)
    save_dataset_csv(dataset, args.out)
    print(f"wrote {len(dataset)} rows ({len(set(dataset.labels))} classes) to {args.out}")
    return 0


def cmd_gen_keypoints(args) -> int:
    import numpy as np

    from .gesture.datasets import write_recording
    from .gesture.synth import ALL_DYNAMIC_CLASSES, sample_dynamic, sample_static

    rng = np.random.default_rng(args.seed)
    frames = []
    idx = 0
    for name in args.gestures:
        if name in ALL_DYNAMIC_CLASSES:
            swept = sample_dynamic(name, rng, start_frame=idx)
            frames.extend(swept)
            idx = swept[-1].frame_index + 1
        else:
            for _ in range(args.frames):
                frames.append(sample_static(name, rng, frame_index=idx))
                idx += 1
    write_recording(frames, args.out)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgic",
        description="Gesture-steerable multi-UAV swarm control stack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario (bundled: %s)" % ", ".join(bundled_scenarios()) if
                         _has_data() else "run a scenario")
    run.add_argument("--scenario", required=True, help="scenario file or bundled name")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--headless", action="store_true", default=True)
    mode.add_argument("--live", action="store_true", default=False,
                      help="real-time pacing plus UDP listeners and telemetry")
    run.add_argument("--out-dir", default="out")
    run.add_argument("--rate", type=float, default=10.0, help="telemetry rate, Hz")
    run.add_argument("--speed", type=float, default=1.0, help="live pacing multiplier")
    run.add_argument("--command-port", type=int, default=47801)
    run.add_argument("--telemetry-port", type=int, default=47802)
    run.add_argument("--keypoint-port", type=int, default=47803)
    run.add_argument("--peer", default="127.0.0.1", help="telemetry destination host")
    run.add_argument("--static-model", help="static classifier model JSON (enables gestures)")
    run.add_argument("--dynamic-model", help="dynamic classifier model JSON")
    run.add_argument("--mapping", help="gesture mapping file (default: bundled)")
    run.set_defaults(func=cmd_run)

    replay = sub.add_parser("replay", help="recompute metrics from a trajectory log")
    replay.add_argument("log")
    replay.add_argument("--speed", type=float, default=1.0)
    replay.add_argument("--live", action="store_true", help="re-emit telemetry over UDP")
    replay.add_argument("--rate", type=float, default=10.0)
    replay.add_argument("--peer", default="127.0.0.1")
    replay.add_argument("--telemetry-port", type=int, default=47802)
    replay.add_argument("--d-col", type=float, default=1.0)
    replay.set_defaults(func=cmd_replay)

    tr = sub.add_parser("train", help="train a classifier on a feature CSV")
    tr.add_argument("dataset")
    tr.add_argument("--out", required=True, help="model JSON output path")
    tr.add_argument("--config", help="training config JSON")
    tr.add_argument("--report", help="metrics report JSON output path")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a saved model on a feature CSV")
    ev.add_argument("model")
    ev.add_argument("dataset")
    ev.add_argument("--report", help="metrics report JSON output path")
    ev.set_defaults(func=cmd_eval)

    vm = sub.add_parser("validate-mapping", help="check a gesture mapping file")
    vm.add_argument("mapping")
    vm.set_defaults(func=cmd_validate_mapping)

    send = sub.add_parser("send", help="inject commands over UDP")
    send.add_argument("--verb")
    send.add_argument("--args", default="{}", help="JSON args object")
    send.add_argument("--mode", help="override the verb's home mode")
    send.add_argument("--file", help="JSON array of command payloads")
    send.add_argument("--host", default="127.0.0.1")
    send.add_argument("--port", type=int, default=47801)
    send.add_argument("--seq", type=int, default=1)
    send.add_argument("--repeat", type=int, default=1,
                      help="send each datagram this many times (duplicate testing)")
    send.set_defaults(func=cmd_send)

    br = sub.add_parser("bridge", help="UDP <-> WebSocket bridge for the console UI")
    br.add_argument("--controller", default="127.0.0.1:47801")
    br.add_argument("--telemetry-port", type=int, default=47802)
    br.add_argument("--ws-port", type=int, default=47810)
    br.set_defaults(func=cmd_bridge)

    gd = sub.add_parser("gen-dataset", help="generate a synthetic gesture feature CSV")
    gd.add_argument("--kind", choices=["static", "dynamic"], required=True)
    gd.add_argument("--classes", type=int, default=0, help="limit to the first N classes")
    gd.add_argument("--per-class", type=int, default=2000)
    gd.add_argument("--seed", type=int, default=0)
    gd.add_argument("--out", required=True)
    gd.set_defaults(func=cmd_gen_dataset)

    gk = sub.add_parser("gen-keypoints", help="write a synthetic keypoint recording (JSONL)")
    gk.add_argument("--gestures", nargs="+", required=True)
    gk.add_argument("--frames", type=int, default=90, help="frames per static gesture")
    gk.add_argument("--seed", type=int, default=0)
    gk.add_argument("--out", required=True)
    gk.set_defaults(func=cmd_gen_keypoints)

    return parser


def _has_data() -> bool:
    try:
        return resources.files("hgic.data.scenarios").is_dir()
    except (ModuleNotFoundError, FileNotFoundError):
        return False


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
