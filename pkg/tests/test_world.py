import math
import random

import pytest

from lyfe.agent.actions import SayAction
from lyfe.scenarios import resolve_map_path
from lyfe.world import (
    AgentBody,
    Location,
    ScriptedHuman,
    World,
    WorldMap,
    move_toward,
)


def flat_map(radius=10.0, speed=1.4):
    return WorldMap(
        [Location("hotel", 0.0, 0.0), Location("library", 100.0, 0.0)],
        vicinity_radius=radius,
        speed=speed,
    )


class Still:
    """Actor that does nothing; collects what it observes."""

    def __init__(self):
        self.seen = []

    def act(self, observations, view):
        self.seen.extend(observations)
        return None


class SayOnce:
    def __init__(self, text, at_tick=0):
        self.text = text
        self.at_tick = at_tick
        self.seen = []

    def act(self, observations, view):
        self.seen.extend(observations)
        if view.tick == self.at_tick:
            return SayAction(self.text)
        return None


class TestMapFile:
    def test_shipped_map_parses(self):
        world_map = WorldMap.from_file(resolve_map_path("sakuramachi"))
        assert len(world_map.locations) == 8
        assert world_map.vicinity_radius == 10.0
        assert world_map.speed == 1.4
        assert world_map.tick_seconds == 1.0
        assert {"hotel", "library", "izakaya", "clinic"} <= set(world_map.locations)

    def test_duplicate_location_names_rejected(self):
        with pytest.raises(ValueError):
            WorldMap([Location("a", 0, 0), Location("a", 1, 1)])

    def test_bad_radius_rejected(self):
        with pytest.raises(ValueError):
            WorldMap([Location("a", 0, 0)], vicinity_radius=0)

    def test_unknown_line_rejected(self, tmp_path):
        bad = tmp_path / "bad.map"
        bad.write_text("location onlyname\n")
        with pytest.raises(ValueError, match="bad.map:1"):
            WorldMap.from_file(bad)


class TestMoveToward:
    def test_at_target_unchanged(self):
        body = AgentBody("a", 5.0, 5.0, speed=3.0)
        assert move_toward(body, (5.0, 5.0)) == (5.0, 5.0)

    def test_partial_step(self):
        body = AgentBody("a", 0.0, 0.0, speed=3.0)
        move_toward(body, (10.0, 0.0))
        assert body.position() == (3.0, 0.0)  # 7 m remaining

    def test_clamps_exactly_at_target(self):
        body = AgentBody("a", 0.0, 0.0, speed=3.0)
        move_toward(body, (2.0, 0.0))
        assert body.position() == (2.0, 0.0)

    def test_arrival_observation_emitted(self):
        world = World(flat_map())
        world.add_body("walker", 98.0, 0.0)
        world.set_destination("walker", "library")
        actor = Still()
        world.step({"walker": actor})
        world.step({"walker": actor})
        arrivals = [o for o in actor.seen if o.kind == "arrival"]
        assert arrivals and arrivals[0].text == "arrived at library"
        assert world.bodies["walker"].position() == (100.0, 0.0)


class TestDelivery:
    def test_vicinity_delivery_excludes_speaker(self):
        world = World(flat_map(radius=10))
        world.add_body("A", 0.0, 0.0)
        world.add_body("B", 5.0, 0.0)
        a, b = SayOnce("hello out there"), Still()
        world.step({"A": a, "B": b})  # A speaks at tick 0
        world.step({"A": a, "B": b})  # delivered at tick 1
        b_utts = [o for o in b.seen if o.kind == "utterance"]
        a_utts = [o for o in a.seen if o.kind == "utterance"]
        assert [o.text for o in b_utts] == ["hello out there"]
        assert b_utts[0].speaker == "A"
        assert a_utts == []

    def test_out_of_range_no_delivery(self):
        world = World(flat_map(radius=10))
        world.add_body("A", 0.0, 0.0)
        world.add_body("B", 50.0, 0.0)
        a, b = SayOnce("hello"), Still()
        world.step({"A": a, "B": b})
        world.step({"A": a, "B": b})
        assert [o for o in b.seen if o.kind == "utterance"] == []

    def test_group_conversation_same_tick(self):
        world = World(flat_map(radius=10))
        world.add_body("A", 0.0, 0.0)
        world.add_body("B", 3.0, 0.0)
        world.add_body("C", 0.0, 3.0)
        a, b, c = SayOnce("listen up everyone"), Still(), Still()
        world.step({"A": a, "B": b, "C": c})
        world.step({"A": a, "B": b, "C": c})
        b_hear = [o for o in b.seen if o.kind == "utterance"]
        c_hear = [o for o in c.seen if o.kind == "utterance"]
        assert [o.text for o in b_hear] == ["listen up everyone"]
        assert [o.text for o in c_hear] == ["listen up everyone"]
        assert b_hear[0].tick == c_hear[0].tick

    def test_conservation_of_utterances(self):
        rng = random.Random(5)
        world = World(flat_map(radius=10))
        for i in range(8):
            world.add_body(f"agent{i}", rng.uniform(0, 30), rng.uniform(0, 30))
        deliveries = []
        world.log = lambda tick, kind, data: deliveries.append((kind, data))
        speaker = "agent0"
        world.queue_utterance(speaker, "broadcast test")
        obs = world.step({})
        speaker_body = world.bodies[speaker]
        expected = {
            other
            for other, body in world.bodies.items()
            if other != speaker
            and speaker_body.distance_to(body.x, body.y) <= world.map.vicinity_radius
        }
        got = {
            name
            for name, incoming in obs.items()
            for o in incoming
            if o.kind == "utterance"
        }
        assert got == expected
        per_agent = [
            sum(1 for o in incoming if o.kind == "utterance")
            for incoming in obs.values()
        ]
        assert all(n <= 1 for n in per_agent)  # none duplicated
        deliver_events = [d for k, d in deliveries if k == "deliver"]
        assert len(deliver_events) == 1
        assert set(deliver_events[0]["recipients"]) == expected

    def test_delivery_symmetry(self):
        rng = random.Random(11)
        world = World(flat_map(radius=12))
        for i in range(10):
            world.add_body(f"a{i}", rng.uniform(0, 40), rng.uniform(0, 40))
        names = list(world.bodies)
        for x in names:
            for y in names:
                if x == y:
                    continue
                bx, by = world.bodies[x], world.bodies[y]
                assert world._within_radius(bx, by) == world._within_radius(by, bx)

    def test_no_teleportation(self):
        rng = random.Random(3)
        world = World(flat_map(radius=10, speed=1.4))
        world.add_body("walker", 0.0, 0.0)
        world.set_destination("walker", "library")
        last = world.bodies["walker"].position()
        for _ in range(50):
            world.step({})
            now = world.bodies["walker"].position()
            moved = math.hypot(now[0] - last[0], now[1] - last[1])
            assert moved <= world.map.speed + 1e-9
            last = now


class TestDestinations:
    def test_unknown_destination_idles_with_system_observation(self):
        world = World(flat_map())
        world.add_body("A", 0.0, 0.0)
        actor = Still()
        world.step({"A": actor})
        ok = world.set_destination("A", "atlantis")
        assert not ok
        world.step({"A": actor})
        systems = [o for o in actor.seen if o.kind == "system"]
        assert systems and "unknown destination" in systems[0].text
        assert world.bodies["A"].position() == (0.0, 0.0)

    def test_agent_target_tracks_moving_body(self):
        world = World(flat_map(radius=2, speed=1.0))
        world.add_body("chaser", 0.0, 0.0)
        world.add_body("target", 10.0, 0.0)
        world.set_destination("chaser", "target")
        for _ in range(30):
            world.step({})
        chaser = world.bodies["chaser"]
        target = world.bodies["target"]
        assert chaser.distance_to(target.x, target.y) <= 2.0

    def test_coordinate_destination(self):
        world = World(flat_map(speed=5.0))
        world.add_body("A", 0.0, 0.0)
        assert world.set_destination("A", "@3,4")
        world.step({})
        assert world.bodies["A"].position() == (3.0, 4.0)

    def test_proximity_observations_emitted(self):
        world = World(flat_map(radius=10))
        world.add_body("A", 0.0, 0.0)
        world.add_body("B", 5.0, 0.0)
        obs = world.step({})
        prox = [o for o in obs["A"] if o.kind == "proximity"]
        assert [o.text for o in prox] == ["nearby: B"]


class TestHumans:
    def test_live_human_rejected_in_deterministic_mode(self):
        world = World(flat_map(), mode="deterministic")
        with pytest.raises(ValueError, match="realtime"):
            world.attach_human("player", (0.0, 0.0))

    def test_scripted_human_allowed_in_deterministic_mode(self):
        world = World(flat_map(), mode="deterministic")
        world.attach_human("player", (0.0, 0.0), scripted=True)
        assert "player" in world.bodies

    def test_duplicate_player_rejected(self):
        world = World(flat_map(), mode="realtime")
        world.attach_human("player", (0.0, 0.0))
        with pytest.raises(ValueError, match="duplicate"):
            world.attach_human("player", (1.0, 1.0))

    def test_human_speech_delivered_like_agent_speech(self):
        world = World(flat_map(radius=10), mode="deterministic")
        world.add_body("A", 0.0, 0.0)
        world.attach_human("player", (4.0, 0.0), scripted=True)
        human = ScriptedHuman("player", [(0, "say", "hello agent")])
        agent = Still()
        world.step({"A": agent, "player": human})
        world.step({"A": agent, "player": human})
        heard = [o for o in agent.seen if o.kind == "utterance"]
        assert [(o.speaker, o.text) for o in heard] == [("player", "hello agent")]

    def test_human_out_of_range_not_heard(self):
        world = World(flat_map(radius=10), mode="deterministic")
        world.add_body("A", 0.0, 0.0)
        world.attach_human("player", (60.0, 0.0), scripted=True)
        human = ScriptedHuman("player", [(0, "say", "too far away")])
        agent = Still()
        world.step({"A": agent, "player": human})
        world.step({"A": agent, "player": human})
        assert [o for o in agent.seen if o.kind == "utterance"] == []

    def test_scripted_replay_reproducible(self):
        def run_once():
            world = World(flat_map(radius=10), mode="deterministic")
            world.add_body("A", 0.0, 0.0)
            world.attach_human("player", (4.0, 0.0), scripted=True)
            human = ScriptedHuman(
                "player", [(0, "say", "first"), (3, "say", "second"), (5, "move", "library")]
            )
            agent = Still()
            trace = []
            world.log = lambda tick, kind, data: trace.append((tick, kind, tuple(sorted(data.items()))))
            for _ in range(10):
                world.step({"A": agent, "player": human})
            return trace

        assert run_once() == run_once()
