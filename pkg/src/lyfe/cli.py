"""Command line interface.

    lyfe run <scenario> --rules <pack> --seed N [--ablate ...] [--out DIR]
    lyfe interview <run-dir> <agent> [--question TEXT] [--repeats N]
    lyfe metrics <run-dir> [--fact FACT_ID]
    lyfe cost <run-dir> [--hours H] [--game-speed X] [--prompt-price P] [--completion-price P]
    lyfe serve <scenario> --rules <pack> [--bind HOST:PORT] [--token T]

Scenario and rules arguments accept either file paths or the names of the
packs shipped with the package (see lyfe/data/).
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .config import Config
from .embedding import HashedBagProvider
from .lang import CostModel, cost_report, scripted_rules_load
from .scenarios import (
    AblationFlags,
    ProviderSet,
    RunLog,
    call_site_counts,
    classify_answer,
    diffusion_metrics,
    load_scenario,
    parse_scenario,
    resolve_scenario_path,
    run,
    run_interview_from_dump,
)

ABLATION_NAMES = ("no_option_action", "no_self_monitor", "flat_memory")


def _resolve_rules(ref: str) -> Path:
    candidate = Path(ref)
    if candidate.exists():
        return candidate
    packaged = Path(str(resources.files("lyfe") / "data" / "rules" / f"{ref}.rules"))
    if packaged.exists():
        return packaged
    raise SystemExit(f"rules pack {ref!r} not found")


def _providers(args) -> ProviderSet:
    rules = _resolve_rules(args.rules) if getattr(args, "rules", None) else None
    if getattr(args, "config", None):
        from .config import Config, build_providers

        return build_providers(Config.load(args.config), rules_path=rules)
    if rules is None:
        raise SystemExit("either --rules or --config with lang.endpoint is required")
    return ProviderSet(
        embedding=HashedBagProvider(dimension=args.dimension),
        lm=scripted_rules_load(rules),
    )


def cmd_run(args) -> int:
    config = load_scenario(resolve_scenario_path(args.scenario))
    providers = _providers(args)
    ablations = None
    if args.ablate:
        flags = {name: False for name in ABLATION_NAMES}
        for name in args.ablate:
            if name not in flags:
                raise SystemExit(f"unknown ablation {name!r}; choices: {ABLATION_NAMES}")
            flags[name] = True
        ablations = AblationFlags(**flags)
    out_dir = Path(args.out or f"runs/{config.name}-seed{args.seed}")
    runlog = run(config, providers, seed=args.seed, out_dir=out_dir, ablations=ablations)
    manifest = runlog.manifest()
    print(f"run complete: {out_dir}")
    print(f"  agents: {len(manifest['agents'])}  ticks: {manifest['duration_ticks']}")
    print(f"  rule misses: {manifest['rule_misses']}")
    print(f"  run hash: {runlog.run_hash()}")
    return 0


def cmd_interview(args) -> int:
    runlog = RunLog(Path(args.run_dir))
    scenario = parse_scenario(runlog.scenario())
    providers = _providers(args)
    questions = [args.question] if args.question else None
    result = run_interview_from_dump(
        Path(args.run_dir), scenario, args.agent, providers,
        questions=questions, repeats=args.repeats,
    )
    for repeat, answers in enumerate(result.answers):
        for question, answer in zip(result.questions, answers):
            print(f"[repeat {repeat}] Q: {question}")
            print(f"[repeat {repeat}] A: {answer}")
    return 0


def cmd_metrics(args) -> int:
    from .scenarios import success_table

    runlogs = [RunLog(Path(d)) for d in args.run_dirs]
    if args.target or len(runlogs) > 1:
        if not args.target:
            raise SystemExit("aggregating several runs requires --target <category>")
        table = success_table(runlogs, args.target)
        print(f"success rate for {args.target!r} over {len(runlogs)} run(s)")
        print(f"  {'agent':<22} {'mean':>7} {'sd':>7}")
        for agent, (mean, sd) in table.items():
            print(f"  {agent:<22} {mean * 100:>6.1f}% {sd * 100:>6.1f}%")
        print(json.dumps({
            "kind": "success_table", "target": args.target,
            "runs": len(runlogs),
            "per_agent": {a: {"mean": m, "sd": s} for a, (m, s) in table.items()},
        }, sort_keys=True))
        return 0
    runlog = runlogs[0]
    scenario = parse_scenario(runlog.scenario())
    facts = [args.fact] if args.fact else [f.fact_id for f in scenario.key_facts]
    for fact_id in facts:
        report = diffusion_metrics(runlog, fact_id)
        print(f"fact {fact_id} (sources: {', '.join(report.sources) or 'none'})")
        print(f"  {'agent':<22} received stored retrieved")
        for name, status in report.per_agent.items():
            r, s, t = status.as_tuple()
            print(f"  {name:<22} {r:^8} {s:^6} {t:^9}")
        print(
            f"  population: received={report.received_p:.3f} "
            f"stored={report.stored_p:.3f} retrieved={report.retrieved_p:.3f}"
        )
        record = {
            "kind": "diffusion", "fact": fact_id,
            "received": report.received_p, "stored": report.stored_p,
            "retrieved": report.retrieved_p,
            "per_agent": {k: v.as_tuple() for k, v in report.per_agent.items()},
        }
        print(json.dumps(record, sort_keys=True))
    for spec in scenario.interviews:
        answers = [
            rec["answer"]
            for rec in runlog.interviews()
            if rec["agent"] == spec.agent and rec["question"] == spec.questions[0]
        ]
        if not answers or not spec.categories:
            continue
        labels = [classify_answer(a, spec.categories) for a in answers]
        print(f"interview {spec.agent}: {labels}")
    return 0


def cmd_cost(args) -> int:
    runlog = RunLog(Path(args.run_dir))
    records = runlog.usage_records()
    model = CostModel(
        price_per_1k_prompt_tokens=args.prompt_price,
        price_per_1k_completion_tokens=args.completion_price,
    )
    n_agents = len(runlog.agent_names())
    report = cost_report(records, model, human_hours=args.hours, n_agents=n_agents)
    print(f"{'call site':<14} {'calls':>7} {'dollars':>12}")
    counts = call_site_counts(records)
    for site, dollars in sorted(report.by_call_site.items()):
        print(f"{site:<14} {counts.get(site, 0):>7} {dollars:>12.4f}")
    print(f"{'total':<14} {len(records):>7} {report.total_dollars:>12.4f}")
    print(
        f"cost per agent per hour: {report.per_agent_per_hour:.4f} "
        f"({n_agents} agents, {args.hours} h)"
    )
    if args.game_speed != 1.0:
        print(
            "cost per agent per human hour at "
            f"{args.game_speed:g}x game speed: "
            f"{report.scaled_per_agent_per_hour(args.game_speed):.4f}"
        )
    print(json.dumps({
        "kind": "cost", "total_dollars": report.total_dollars,
        "per_agent_per_hour": report.per_agent_per_hour,
        "by_call_site": report.by_call_site,
        "n_agents": n_agents, "hours": args.hours,
    }, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import time

    from .agent.brain import AgentBrain
    from .gateway import default_interview_runner, serve
    from .scenarios import brain_config_for, resolve_map_path
    from .world import RealtimeBrainActor, RealtimeLoop, World, WorldMap

    config = load_scenario(resolve_scenario_path(args.scenario))
    providers = _providers(args)
    cfg = Config.load(args.config) if args.config else Config()
    world_map = WorldMap.from_file(resolve_map_path(config.map))
    world = World(world_map, mode="realtime")
    brains = {}
    actors = {}
    for spec in config.agents:
        world.spawn_at(spec.name, spec.spawn)
        brain = AgentBrain(
            agent_id=spec.name, persona=spec.persona, goal=spec.goal,
            embedding=providers.embedding, config=brain_config_for(config),
        )
        brain.memory.seed(list(spec.recent_memories), list(spec.long_term_memories))
        brains[spec.name] = brain
        actors[spec.name] = RealtimeBrainActor(brain, providers.lm)
    loop = RealtimeLoop(world, actors, ticks_per_second=args.tick_rate)
    host, _, port = args.bind.partition(":")
    server, _service = serve(
        loop,
        bind=(host or "127.0.0.1", int(port or 8787)),
        auth_token=args.token or cfg.get("gateway.auth_token"),
        interview_runner=default_interview_runner(brains, providers.lm),
        say_interval_s=cfg.get_float("gateway.say_interval_s"),
    )
    loop.start()
    print(f"gateway listening on {args.bind} (scenario {config.name}); ctrl-c to stop")
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        loop.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lyfe", description=__doc__)
    parser.add_argument("--dimension", type=int, default=256,
                        help="embedding dimension for the hashed test provider")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario deterministically")
    p_run.add_argument("scenario")
    p_run.add_argument("--rules", default=None, help="scripted rules pack (path or name)")
    p_run.add_argument("--config", default=None, help="INI config file (remote providers)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--ablate", nargs="*", default=[], metavar="FLAG",
                       help=f"any of: {', '.join(ABLATION_NAMES)}")
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(fn=cmd_run)

    p_int = sub.add_parser("interview", help="re-interview an agent from a run's memdump")
    p_int.add_argument("run_dir")
    p_int.add_argument("agent")
    p_int.add_argument("--rules", default=None)
    p_int.add_argument("--config", default=None, help="INI config file (remote providers)")
    p_int.add_argument("--question", default=None)
    p_int.add_argument("--repeats", type=int, default=3)
    p_int.set_defaults(fn=cmd_interview)

    p_met = sub.add_parser("metrics", help="diffusion and interview metrics for runs")
    p_met.add_argument("run_dirs", nargs="+", metavar="run_dir")
    p_met.add_argument("--fact", default=None)
    p_met.add_argument("--target", default=None,
                       help="aggregate per-agent success for this category over all runs")
    p_met.set_defaults(fn=cmd_metrics)

    p_cost = sub.add_parser("cost", help="token cost report for a run")
    p_cost.add_argument("run_dir", nargs="?", default=None)
    p_cost.add_argument("--run", dest="run_dir_flag", default=None,
                        help="alias for the positional run directory")
    p_cost.add_argument("--hours", type=float, default=1.0)
    p_cost.add_argument("--game-speed", type=float, default=1.0)
    p_cost.add_argument("--prompt-price", type=float, default=0.0015,
                        help="dollars per 1k prompt tokens")
    p_cost.add_argument("--completion-price", type=float, default=0.002,
                        help="dollars per 1k completion tokens")
    p_cost.set_defaults(fn=cmd_cost)

    p_srv = sub.add_parser("serve", help="serve a realtime simulation over the gateway")
    p_srv.add_argument("scenario")
    p_srv.add_argument("--rules", default=None)
    p_srv.add_argument("--bind", default="127.0.0.1:8787")
    p_srv.add_argument("--token", default=None)
    p_srv.add_argument("--tick-rate", type=float, default=2.0)
    p_srv.add_argument("--config", default=None, help="INI config file")
    p_srv.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "cost":
        if args.run_dir is None:
            args.run_dir = args.run_dir_flag
        if args.run_dir is None:
            parser.error("cost requires a run directory (positional or --run)")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
