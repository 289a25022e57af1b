#!/usr/bin/env python3
"""Reference simulator and generator for the golden scenario corpus.

Implements the predefined domain's semantics directly (hardcoded rules, no
PDDL machinery) and emits, per scenario: problem.pddl, plan.txt, trace.golden
and queries.txt. The C++ validator must reproduce trace.golden byte-exactly;
expected query answers are hand-derived and encoded here.
"""

import os
import sys

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "assets", "golden")


class World:
    def __init__(self, agents, rooms, containers, objects, utterances, init):
        self.agents = agents
        self.rooms = rooms
        self.containers = containers
        self.objects = objects
        self.utterances = utterances
        self.state = set(init)
        self._close_initial_visibility()

    def _close_initial_visibility(self):
        add = set()
        for a in self.agents:
            rooms = [r for (p, *args) in self.state
                     if p == "at" and args[0] == a for r in [args[1]]]
            if not rooms:
                continue
            r = rooms[0]
            for o in self.objects:
                if self._visible(o, r):
                    add.add(("seen", a, o))
        self.state |= add

    def _visible(self, o, room):
        s = self.state
        if ("in", o, room) in s:
            return True
        for c in self.containers:
            if ("part-of", c, room) in s and ("opened", c) in s and ("in", o, c) in s:
                return True
        for a in self.agents:
            if ("holding", a, o) in s and ("at", a, room) in s:
                return True
        return False

    def agents_at(self, room):
        return [a for a in self.agents if ("at", a, room) in self.state]

    def step(self, action):
        """Returns (accepted, adds, dels); preconditions read self.state."""
        s = self.state
        name, *args = action
        adds, dels = set(), set()
        if name == "move":
            a, src, dst = args
            if ("at", a, src) not in s or src == dst:
                return False, adds, dels
            dels.add(("at", a, src))
            adds.add(("at", a, dst))
            for o in self.objects:
                if ("in", o, dst) in s or any(
                        ("part-of", c, dst) in s and ("opened", c) in s and
                        ("in", o, c) in s for c in self.containers):
                    adds.add(("seen", a, o))
        elif name == "open":
            a, c, r = args
            if ("at", a, r) not in s or ("part-of", c, r) not in s or ("opened", c) in s:
                return False, adds, dels
            adds.add(("opened", c))
            for o in self.objects:
                if ("in", o, c) in s:
                    for x in self.agents_at(r):
                        adds.add(("seen", x, o))
        elif name == "close":
            a, c, r = args
            if ("at", a, r) not in s or ("part-of", c, r) not in s or ("opened", c) not in s:
                return False, adds, dels
            dels.add(("opened", c))
        elif name == "grab":
            a, o, l, r = args
            reachable = l == r or (("part-of", l, r) in s and ("opened", l) in s)
            if (("at", a, r) not in s or ("in", o, l) not in s or not reachable or
                    any(("holding", x, o) in s for x in self.agents)):
                return False, adds, dels
            dels.add(("in", o, l))
            adds.add(("holding", a, o))
            for x in self.agents_at(r):
                adds.add(("seen", x, o))
        elif name == "drop":
            a, o, l, r = args
            reachable = l == r or (("part-of", l, r) in s and ("opened", l) in s)
            if ("at", a, r) not in s or ("holding", a, o) not in s or not reachable:
                return False, adds, dels
            dels.add(("holding", a, o))
            adds.add(("in", o, l))
            for x in self.agents_at(r):
                adds.add(("seen", x, o))
        elif name in ("tell", "ask"):
            a, u, r = args
            if ("at", a, r) not in s:
                return False, adds, dels
            adds.add(("heard", a, u))
            for x in self.agents_at(r):
                adds.add(("heard", x, u))
        else:
            raise ValueError("unknown action " + name)
        return True, adds, dels

    def apply(self, action):
        accepted, adds, dels = self.step(action)
        assert accepted, f"golden plan step rejected: {action}"
        self.state = (self.state - dels) | adds

    def render_state(self):
        atoms = sorted("(" + " ".join(atom) + ")" for atom in self.state)
        return "STATE" + "".join(" " + a for a in atoms)


def render_trace(world, plan):
    lines = ["STEP 0", world.render_state()]
    for i, action in enumerate(plan, 1):
        world.apply(action)
        lines.append(f"STEP {i} ACTION ({' '.join(action)}) ACCEPTED")
        lines.append(world.render_state())
    return "\n".join(lines) + "\n"


def problem_text(name, scenario):
    lines = [f"(define (problem {name})", "  (:domain tom)", "  (:objects"]
    for group, type_name in (("agents", "agent"), ("rooms", "room"),
                             ("containers", "container"), ("objects", "obj"),
                             ("utterances", "utterance")):
        for entry in scenario.get(group, ()):
            lines.append(f"    {entry} - {type_name}")
    lines.append("  )")
    lines.append("  (:init")
    for atom in sorted("(" + " ".join(a) + ")" for a in scenario["init"]):
        lines.append(f"    {atom}")
    lines.append("  )")
    texts = scenario.get("utterance_texts", {})
    if texts:
        lines.append("  (:utterances")
        for u in sorted(texts):
            lines.append(f'    ({u} "{texts[u]}")')
        lines.append("  )")
    lines.append(")")
    return "\n".join(lines) + "\n"


SCENARIOS = {
    # -- Sally-Anne single-agent false belief ------------------------------
    "sa_classic": dict(
        agents=["sally", "anne"], rooms=["room1", "room2"],
        containers=["basket", "box"], objects=["ball"],
        init=[("at", "sally", "room1"), ("at", "anne", "room1"),
              ("in", "ball", "basket"),
              ("part-of", "basket", "room1"), ("part-of", "box", "room1"),
              ("opened", "basket"), ("opened", "box")],
        plan=[("move", "sally", "room1", "room2"),
              ("grab", "anne", "ball", "basket", "room1"),
              ("drop", "anne", "ball", "box", "room1")],
        queries=[("believes sally ball", "basket"),
                 ("believes anne ball", "box"),
                 ("believes anne sally ball", "basket"),
                 ("believes sally anne ball", "basket")],
    ),
    "sa_return": dict(
        agents=["sally", "anne"], rooms=["room1", "room2"],
        containers=["basket", "box"], objects=["ball"],
        init=[("at", "sally", "room1"), ("at", "anne", "room1"),
              ("in", "ball", "basket"),
              ("part-of", "basket", "room1"), ("part-of", "box", "room1"),
              ("opened", "basket"), ("opened", "box")],
        plan=[("move", "sally", "room1", "room2"),
              ("grab", "anne", "ball", "basket", "room1"),
              ("drop", "anne", "ball", "box", "room1"),
              ("move", "sally", "room2", "room1")],
        queries=[("believes sally ball", "box"),
                 ("believes anne sally ball", "box")],
    ),
    "sa_closed_box": dict(
        agents=["sally", "anne"], rooms=["room1", "room2"],
        containers=["basket", "box"], objects=["ball"],
        init=[("at", "sally", "room1"), ("at", "anne", "room1"),
              ("in", "ball", "basket"),
              ("part-of", "basket", "room1"), ("part-of", "box", "room1"),
              ("opened", "basket"), ("opened", "box")],
        plan=[("move", "sally", "room1", "room2"),
              ("grab", "anne", "ball", "basket", "room1"),
              ("drop", "anne", "ball", "box", "room1"),
              ("close", "anne", "box", "room1"),
              ("move", "sally", "room2", "room1")],
        queries=[("believes sally ball", "basket"),
                 ("believes sally anne ball", "basket")],
    ),
    "sa_unseen": dict(
        agents=["sally", "anne"], rooms=["room1", "room2"],
        containers=["basket"], objects=["ball"],
        init=[("at", "sally", "room1"), ("at", "anne", "room1"),
              ("in", "ball", "basket"), ("part-of", "basket", "room1")],
        plan=[("move", "sally", "room1", "room2"),
              ("open", "anne", "basket", "room1")],
        queries=[("believes sally ball", "unknown"),
                 ("believes anne sally ball", "unknown")],
    ),
    # -- container visibility ---------------------------------------------
    "cv_open_reveal": dict(
        agents=["alice", "bob"], rooms=["room1"], containers=["chest"],
        objects=["coin"],
        init=[("at", "alice", "room1"), ("at", "bob", "room1"),
              ("in", "coin", "chest"), ("part-of", "chest", "room1")],
        plan=[("open", "bob", "chest", "room1")],
        queries=[("believes alice coin", "chest"),
                 ("believes alice bob coin", "chest")],
    ),
    "cv_move_reveal": dict(
        agents=["bob"], rooms=["bedroom", "kitchen"], containers=["jar"],
        objects=["apple", "coin"],
        init=[("at", "bob", "bedroom"),
              ("in", "apple", "kitchen"), ("in", "coin", "jar"),
              ("part-of", "jar", "kitchen"), ("opened", "jar")],
        plan=[("move", "bob", "bedroom", "kitchen")],
        queries=[("believes bob apple", "kitchen")],
    ),
    "cv_grab_witness": dict(
        agents=["carol", "dave"], rooms=["room1", "room2"], containers=["safe"],
        objects=["gem"],
        init=[("at", "carol", "room1"), ("at", "dave", "room1"),
              ("in", "gem", "safe"), ("part-of", "safe", "room1"),
              ("opened", "safe")],
        plan=[("grab", "carol", "gem", "safe", "room1"),
              ("move", "dave", "room1", "room2"),
              ("drop", "carol", "gem", "room1", "room1")],
        queries=[("believes dave gem", "carol"),
                 ("believes dave carol gem", "carol")],
    ),
    "cv_close_stale": dict(
        agents=["eve", "frank"], rooms=["room1", "room2"], containers=["drawer"],
        objects=["key"],
        init=[("at", "eve", "room1"), ("at", "frank", "room2"),
              ("holding", "eve", "key"),
              ("part-of", "drawer", "room1"), ("opened", "drawer")],
        plan=[("drop", "eve", "key", "drawer", "room1"),
              ("close", "eve", "drawer", "room1"),
              ("move", "frank", "room2", "room1")],
        queries=[("believes frank key", "unknown")],
    ),
    # -- conversations with join/leave ------------------------------------
    "conv_basic": dict(
        agents=["alice", "bob", "carol"], rooms=["scene", "offstage"],
        utterances=["u1"],
        init=[("at", "alice", "scene"), ("at", "bob", "scene"),
              ("at", "carol", "offstage")],
        utterance_texts={"u1": "I hope everyone is doing well!"},
        plan=[("tell", "alice", "u1", "scene")],
        queries=[("heard carol u1", "false")],
    ),
    "conv_leave": dict(
        agents=["alice", "bob"], rooms=["scene", "offstage"],
        utterances=["u1", "u2"],
        init=[("at", "alice", "scene"), ("at", "bob", "scene")],
        utterance_texts={"u1": "I need to leave now, talk to you later!",
                         "u2": "Finally some quiet."},
        plan=[("tell", "bob", "u1", "scene"),
              ("move", "bob", "scene", "offstage"),
              ("tell", "alice", "u2", "scene")],
        queries=[("heard bob u2", "false")],
    ),
    "conv_join": dict(
        agents=["alice", "carol"], rooms=["scene", "offstage"],
        utterances=["u1", "u2"],
        init=[("at", "alice", "scene"), ("at", "carol", "offstage")],
        utterance_texts={"u1": "Hope I'm not interrupting!",
                         "u2": "Of course you're not!"},
        plan=[("tell", "alice", "u1", "scene"),
              ("move", "carol", "offstage", "scene"),
              ("tell", "alice", "u2", "scene")],
        queries=[("heard carol u2", "true")],
    ),
    "conv_ask": dict(
        agents=["alice", "dave"], rooms=["scene", "offstage"],
        containers=[], objects=["phone"], utterances=["u3"],
        init=[("at", "alice", "scene"), ("at", "dave", "scene"),
              ("in", "phone", "scene")],
        utterance_texts={"u3": "Has anyone seen my phone?"},
        plan=[("ask", "dave", "u3", "scene"),
              ("grab", "dave", "phone", "scene", "scene"),
              ("move", "alice", "scene", "offstage"),
              ("drop", "dave", "phone", "scene", "scene")],
        queries=[("believes dave alice phone", "dave")],
    ),
}


def main():
    for name, sc in SCENARIOS.items():
        directory = os.path.join(GOLDEN_DIR, name)
        os.makedirs(directory, exist_ok=True)
        world = World(sc.get("agents", []), sc.get("rooms", []),
                      sc.get("containers", []), sc.get("objects", []),
                      sc.get("utterances", []), sc["init"])
        trace = render_trace(world, sc["plan"])
        with open(os.path.join(directory, "problem.pddl"), "w") as f:
            f.write(problem_text(name.replace("_", "-"), sc))
        with open(os.path.join(directory, "plan.txt"), "w") as f:
            f.write("".join("(" + " ".join(a) + ")\n" for a in sc["plan"]))
        with open(os.path.join(directory, "trace.golden"), "w") as f:
            f.write(trace)
        with open(os.path.join(directory, "queries.txt"), "w") as f:
            for query, expected in sc["queries"]:
                f.write(f"{query} => {expected}\n")
    first = sum(1 for sc in SCENARIOS.values()
                for q, _ in sc["queries"] if len(q.split()) == 3)
    second = sum(1 for sc in SCENARIOS.values()
                 for q, _ in sc["queries"] if len(q.split()) == 4)
    print(f"wrote {len(SCENARIOS)} scenarios: "
          f"{first} first-order, {second} second-order queries")


if __name__ == "__main__":
    sys.exit(main())
