"""Question templates: referent search, binding, and yes/no balancing.

Each template owns a text pattern, a program skeleton, and an applicability
predicate. Binding picks concrete objects and attribute values at random,
builds a natural-language question plus its program, and keeps the pair only
when the program evaluates to a definite answer (and, when aimed, to the
requested yes/no answer). Referring expressions are built from static
attributes and cycle adjectives and are always uniquely identifying, so
`unique` never goes Invalid on an emitted question.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..engine import TemporalScene
from ..model import (
    COLOR_NAMES,
    SIZES,
    FunctionalProgram,
    ObjectSpec,
    ProgramNode,
    QARecord,
    ValueKind,
)
from ..relations import RELATIONS, attach
from .program import execute

log = logging.getLogger(__name__)

CYCLE_ADJECTIVE = {
    "orbit": "orbiting",
    "linear_motion": "back-and-forth moving",
    "size_change": "size-changing",
    "color_change": "color-changing",
    "orientation_change": "spinning",
}

CYCLE_NOUN = {
    "orbit": "orbit",
    "linear_motion": "back-and-forth",
    "size_change": "size-change",
    "color_change": "color-change",
    "orientation_change": "rotation",
}

RELATION_PHRASE = {
    "left": "to the left of",
    "right": "to the right of",
    "front": "in front of",
    "behind": "behind",
}

COUNT_PHRASE = {
    "cyclic": "exhibit cyclic behavior",
    "moving": "change their position over time",
    "orbit": "orbit another object",
    "linear_motion": "move back and forth along a line",
    "size_change": "change their size over time",
    "color_change": "change their color over time",
    "orientation_change": "rotate in place",
}


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def _shuffled(rng: np.random.Generator, items: list) -> list:
    return [items[i] for i in rng.permutation(len(items))]


class _TemplateCtx:
    """Per-scene caches shared by all binding attempts."""

    def __init__(self, temporal: TemporalScene):
        self.temporal = attach(temporal)
        self.graph = temporal.graph
        self.specs: tuple[ObjectSpec, ...] = temporal.graph.objects
        self.n = len(self.specs)
        self.static_color = [not s.has_cycle("color_change") for s in self.specs]
        self.static_size = [not s.has_cycle("size_change") for s in self.specs]
        codes = temporal.color_codes
        self.ever_colors = [set(COLOR_NAMES[c] for c in np.unique(codes[i]))
                            for i in range(self.n)]
        sizes = temporal.size_codes
        self.ever_sizes = [set(name for name, code in (("small", 0), ("large", 1))
                               if (sizes[i] == code).any())
                           for i in range(self.n)]
        self.orbiters = [i for i, s in enumerate(self.specs) if s.has_cycle("orbit")]
        self.transitioners = [i for i, s in enumerate(self.specs)
                              if s.has_cycle("size_change") or s.has_cycle("color_change")]
        self.cycle_pairs = [(i, c.kind) for i, s in enumerate(self.specs)
                            for c in s.cycles]

    def matches(self, i: int, base: str | None,
                descriptors: tuple[tuple[str, str], ...]) -> bool:
        spec = self.specs[i]
        if base is not None and not spec.has_cycle(base):
            return False
        for kind, value in descriptors:
            if kind == "size":
                if not (self.static_size[i] and spec.size0 == value):
                    return False
            elif kind == "color":
                if not (self.static_color[i] and spec.color0 == value):
                    return False
            elif kind == "material":
                if spec.material != value:
                    return False
            elif kind == "shape":
                if spec.shape != value:
                    return False
            elif kind == "cycle":
                if not spec.has_cycle(value):
                    return False
        return True


@dataclass(frozen=True)
class _Ref:
    phrase: str
    base: str | None
    descriptors: tuple[tuple[str, str], ...]


def _phrase(descriptors, lead: str = "") -> str:
    by_kind: dict[str, list[str]] = {"size": [], "color": [], "cycle": [],
                                     "material": [], "shape": []}
    for kind, value in descriptors:
        word = CYCLE_ADJECTIVE[value] if kind == "cycle" else value
        by_kind[kind].append(word)
    if lead:
        by_kind["cycle"].insert(0, lead)
    noun = by_kind["shape"][0] if by_kind["shape"] else "object"
    words = by_kind["size"] + by_kind["color"] + by_kind["cycle"] + by_kind["material"]
    return "the " + " ".join(words + [noun])


def _find_referent(ctx: _TemplateCtx, rng: np.random.Generator, target: int,
                   base: str | None = None, exclude: frozenset = frozenset(),
                   lead: str = "") -> _Ref | None:
    """Find a uniquely identifying attribute combination for `target` among
    objects passing the base cycle filter; None when every combo is ambiguous."""
    spec = ctx.specs[target]
    options: list[tuple[str, str]] = []
    if "size" not in exclude and ctx.static_size[target]:
        options.append(("size", spec.size0))
    if "color" not in exclude and ctx.static_color[target]:
        options.append(("color", spec.color0))
    options.append(("material", spec.material))
    options.append(("shape", spec.shape))
    for cycle in spec.cycles:
        if cycle.kind != base:
            options.append(("cycle", cycle.kind))

    by_length: dict[int, list[tuple[tuple[str, str], ...]]] = {}
    for mask in range(1 << len(options)):
        combo = tuple(options[b] for b in range(len(options)) if mask >> b & 1)
        by_length.setdefault(len(combo), []).append(combo)

    for length in sorted(by_length):
        for combo in _shuffled(rng, by_length[length]):
            hits = [i for i in range(ctx.n) if ctx.matches(i, base, combo)]
            if hits == [target]:
                return _Ref(_phrase(combo, lead), base, combo)
    return None


def _emit_ref(nodes: list[ProgramNode], scene_idx: int, ref: _Ref) -> int:
    """Append the referent's filter chain plus unique; returns the unique index."""
    cur = scene_idx
    if ref.base is not None:
        nodes.append(ProgramNode(f"filter_{ref.base}", (), (cur,)))
        cur = len(nodes) - 1
    order = {"cycle": 0, "size": 1, "color": 2, "material": 3, "shape": 4}
    for kind, value in sorted(ref.descriptors, key=lambda d: order[d[0]]):
        if kind == "cycle":
            nodes.append(ProgramNode(f"filter_{value}", (), (cur,)))
        elif kind == "size":
            nodes.append(ProgramNode("filter_size_always", (value,), (cur,)))
        elif kind == "color":
            nodes.append(ProgramNode("filter_color_always", (value,), (cur,)))
        elif kind == "material":
            nodes.append(ProgramNode("filter_material", (value,), (cur,)))
        else:
            nodes.append(ProgramNode("filter_shape", (value,), (cur,)))
        cur = len(nodes) - 1
    nodes.append(ProgramNode("unique", (), (cur,)))
    return len(nodes) - 1


@dataclass(frozen=True)
class QuestionTemplate:
    template_id: str
    answer_kind: str
    quantifier: str
    text_patterns: tuple[str, ...]
    applicable: Callable[[TemporalScene], bool]
    sample: Callable[[_TemplateCtx, np.random.Generator], tuple[str, list[ProgramNode]] | None]


def _quant_word(quantifier: str) -> str:
    return "ever" if quantifier == "existential" else "always"


def _sample_attributes(quantifier: str):
    mode = "ever" if quantifier == "existential" else "always"

    def sample(ctx: _TemplateCtx, rng: np.random.Generator):
        target = int(rng.integers(ctx.n))
        attr = _pick(rng, ("color", "size"))
        ref = _find_referent(ctx, rng, target, exclude=frozenset((attr,)))
        if ref is None:
            return None
        domain = COLOR_NAMES if attr == "color" else SIZES
        value = _pick(rng, domain)
        nodes: list[ProgramNode] = [ProgramNode("scene")]
        uid = _emit_ref(nodes, 0, ref)
        nodes.append(ProgramNode(f"filter_{attr}_{mode}", (value,), (0,)))
        nodes.append(ProgramNode("include", (), (uid, len(nodes) - 1)))
        text = f"Is {ref.phrase} {_quant_word(quantifier)} {value}?"
        return text, nodes

    return sample


def _sample_compare(quantifier: str):
    mode = "ever" if quantifier == "existential" else "always"

    def sample(ctx: _TemplateCtx, rng: np.random.Generator):
        if ctx.n < 2:
            return None
        a = int(rng.integers(ctx.n))
        b = int(rng.integers(ctx.n - 1))
        if b >= a:
            b += 1
        attr = _pick(rng, ("color", "size"))
        ref_a = _find_referent(ctx, rng, a, exclude=frozenset((attr,)))
        ref_b = _find_referent(ctx, rng, b, exclude=frozenset((attr,)))
        if ref_a is None or ref_b is None:
            return None
        nodes: list[ProgramNode] = [ProgramNode("scene")]
        ua = _emit_ref(nodes, 0, ref_a)
        ub = _emit_ref(nodes, 0, ref_b)
        nodes.append(ProgramNode(f"equal_{attr}_{mode}", (), (ua, ub)))
        text = (f"Is {ref_a.phrase} {_quant_word(quantifier)} the same {attr} "
                f"as {ref_b.phrase}?")
        return text, nodes

    return sample


def _sample_relate(quantifier: str):
    mode = "ever" if quantifier == "existential" else "always"

    def sample(ctx: _TemplateCtx, rng: np.random.Generator):
        if ctx.n < 2:
            return None
        a = int(rng.integers(ctx.n))
        b = int(rng.integers(ctx.n - 1))
        if b >= a:
            b += 1
        relation = _pick(rng, RELATIONS)
        ref_a = _find_referent(ctx, rng, a)
        ref_b = _find_referent(ctx, rng, b)
        if ref_a is None or ref_b is None:
            return None
        nodes: list[ProgramNode] = [ProgramNode("scene")]
        ua = _emit_ref(nodes, 0, ref_a)
        ub = _emit_ref(nodes, 0, ref_b)
        nodes.append(ProgramNode(f"relate_{mode}", (relation,), (ub,)))
        nodes.append(ProgramNode("include", (), (ua, len(nodes) - 1)))
        text = (f"Is {ref_a.phrase} {_quant_word(quantifier)} "
                f"{RELATION_PHRASE[relation]} {ref_b.phrase}?")
        return text, nodes

    return sample


def _sample_orbit(ctx: _TemplateCtx, rng: np.random.Generator):
    if not ctx.orbiters:
        return None
    target = _pick(rng, ctx.orbiters)
    attr = _pick(rng, ("color", "size"))
    ref = _find_referent(ctx, rng, target, base="orbit")
    if ref is None:
        return None
    center_id = ctx.specs[target].cycle_of("orbit").variant.center_id
    center = ctx.graph.object(center_id)
    dynamic = center.has_cycle(f"{attr}_change")
    nodes: list[ProgramNode] = [ProgramNode("scene")]
    uid = _emit_ref(nodes, 0, ref)
    nodes.append(ProgramNode("query_orbit_center", (), (uid,)))
    query = f"query_{attr}_initial" if dynamic else f"query_{attr}"
    nodes.append(ProgramNode(query, (), (len(nodes) - 1,)))
    lead = "initial " if dynamic else ""
    text = f"What is the {lead}{attr} of the object that {ref.phrase} orbits around?"
    return text, nodes


def _sample_clockwise(ctx: _TemplateCtx, rng: np.random.Generator):
    if not ctx.orbiters:
        return None
    target = _pick(rng, ctx.orbiters)
    ref = _find_referent(ctx, rng, target, base="orbit")
    if ref is None:
        return None
    nodes: list[ProgramNode] = [ProgramNode("scene")]
    uid = _emit_ref(nodes, 0, ref)
    nodes.append(ProgramNode("query_orbit_direction", (), (uid,)))
    text = f"Does {ref.phrase} orbit in a clockwise or counterclockwise direction?"
    return text, nodes


def _sample_transition(ctx: _TemplateCtx, rng: np.random.Generator):
    if not ctx.transitioners:
        return None
    target = _pick(rng, ctx.transitioners)
    spec = ctx.specs[target]
    kinds = [k for k in ("size_change", "color_change") if spec.has_cycle(k)]
    kind = _pick(rng, kinds)
    attr = "size" if kind == "size_change" else "color"
    direction = _pick(rng, ("initial", "final"))
    lead = CYCLE_ADJECTIVE[kind] if direction == "initial" else ""
    ref = _find_referent(ctx, rng, target, base=kind, exclude=frozenset((attr,)),
                         lead=lead)
    if ref is None:
        return None
    nodes: list[ProgramNode] = [ProgramNode("scene")]
    uid = _emit_ref(nodes, 0, ref)
    nodes.append(ProgramNode(f"query_{attr}_{direction}", (), (uid,)))
    if direction == "initial":
        text = f"What is the initial {attr} of {ref.phrase}?"
    else:
        text = f"What {attr} does {ref.phrase} change into during its cycle?"
    return text, nodes


def _sample_counting(ctx: _TemplateCtx, rng: np.random.Generator):
    kind = _pick(rng, tuple(COUNT_PHRASE))
    nodes = [ProgramNode("scene"),
             ProgramNode(f"filter_{kind}", (), (0,))]
    nodes.append(ProgramNode("count", (), (1,)))
    text = f"How many objects in the scene {COUNT_PHRASE[kind]}?"
    return text, nodes


def _sample_cycle_query(what: str):
    def sample(ctx: _TemplateCtx, rng: np.random.Generator):
        if not ctx.cycle_pairs:
            return None
        target, kind = _pick(rng, ctx.cycle_pairs)
        ref = _find_referent(ctx, rng, target, base=kind)
        if ref is None:
            return None
        nodes: list[ProgramNode] = [ProgramNode("scene")]
        uid = _emit_ref(nodes, 0, ref)
        nodes.append(ProgramNode(f"query_{kind}_{what}", (), (uid,)))
        noun = CYCLE_NOUN[kind]
        if what == "period":
            text = (f"How many frames does one {noun} cycle of {ref.phrase} "
                    f"take to complete?")
        else:
            text = (f"How many times does {ref.phrase} complete its {noun} "
                    f"cycle over the course of the video?")
        return text, nodes

    return sample


def _has_orbiter(temporal: TemporalScene) -> bool:
    return any(s.has_cycle("orbit") for s in temporal.graph.objects)


def _has_transitioner(temporal: TemporalScene) -> bool:
    return any(s.has_cycle("size_change") or s.has_cycle("color_change")
               for s in temporal.graph.objects)


def _has_cyclic(temporal: TemporalScene) -> bool:
    return any(s.is_cyclic for s in temporal.graph.objects)


def _always(temporal: TemporalScene) -> bool:
    return True


def _pair(temporal: TemporalScene) -> bool:
    return len(temporal.graph.objects) >= 2


def _make_templates() -> dict[str, QuestionTemplate]:
    templates: list[QuestionTemplate] = []
    for quantifier in ("existential", "universal"):
        q = quantifier
        word = _quant_word(q)
        templates.append(QuestionTemplate(
            template_id=f"descriptive_{q}_attributes",
            answer_kind="yes_no", quantifier=q,
            text_patterns=(f"Is <REF> {word} <VALUE>?",),
            applicable=_always, sample=_sample_attributes(q)))
        templates.append(QuestionTemplate(
            template_id=f"descriptive_{q}_compare",
            answer_kind="yes_no", quantifier=q,
            text_patterns=(f"Is <REF1> {word} the same <ATTR> as <REF2>?",),
            applicable=_pair, sample=_sample_compare(q)))
        templates.append(QuestionTemplate(
            template_id=f"descriptive_{q}_relate",
            answer_kind="yes_no", quantifier=q,
            text_patterns=(f"Is <REF1> {word} <RELATION> <REF2>?",),
            applicable=_pair, sample=_sample_relate(q)))
    templates.append(QuestionTemplate(
        template_id="cycle_representative_orbit",
        answer_kind="attribute", quantifier="none",
        text_patterns=("What is the <ATTR> of the object that <REF> orbits around?",),
        applicable=_has_orbiter, sample=_sample_orbit))
    templates.append(QuestionTemplate(
        template_id="cycle_representative_clockwise",
        answer_kind="attribute", quantifier="none",
        text_patterns=("Does <REF> orbit in a clockwise or counterclockwise direction?",),
        applicable=_has_orbiter, sample=_sample_clockwise))
    templates.append(QuestionTemplate(
        template_id="cycle_representative_transition",
        answer_kind="attribute", quantifier="none",
        text_patterns=("What is the initial <ATTR> of <REF>?",
                       "What <ATTR> does <REF> change into during its cycle?"),
        applicable=_has_transitioner, sample=_sample_transition))
    templates.append(QuestionTemplate(
        template_id="numeric_counting",
        answer_kind="integer", quantifier="none",
        text_patterns=("How many objects in the scene <PREDICATE>?",),
        applicable=_always, sample=_sample_counting))
    templates.append(QuestionTemplate(
        template_id="numeric_periodicity",
        answer_kind="integer", quantifier="none",
        text_patterns=("How many frames does one <CYCLE> cycle of <REF> take to complete?",),
        applicable=_has_cyclic, sample=_sample_cycle_query("period")))
    templates.append(QuestionTemplate(
        template_id="numeric_occurrence",
        answer_kind="integer", quantifier="none",
        text_patterns=("How many times does <REF> complete its <CYCLE> cycle "
                       "over the course of the video?",),
        applicable=_has_cyclic, sample=_sample_cycle_query("passes")))
    return {t.template_id: t for t in templates}


TEMPLATES: dict[str, QuestionTemplate] = _make_templates()

_KIND_FOR_ANSWER = {"yes_no": ValueKind.BOOL, "attribute": ValueKind.ATTR,
                    "integer": ValueKind.INT}


def instantiate(template: QuestionTemplate, temporal: TemporalScene,
                rng: np.random.Generator, aim: bool | None = None,
                max_attempts: int = 50,
                ctx: _TemplateCtx | None = None) -> QARecord | None:
    """Bind a template against a scene; None when no valid binding was found.

    aim (yes/no templates only) keeps re-sampling until the answer matches,
    within the attempt budget.
    """
    if ctx is None:
        ctx = _TemplateCtx(temporal)
    for _ in range(max_attempts):
        draft = template.sample(ctx, rng)
        if draft is None:
            continue
        text, nodes = draft
        program = FunctionalProgram(tuple(nodes))
        answer = execute(program, ctx.temporal)
        if answer.is_invalid:
            continue
        if answer.kind is not _KIND_FOR_ANSWER[template.answer_kind]:
            raise AssertionError(
                f"{template.template_id} produced a {answer.kind.value} answer")
        if aim is not None and answer.data is not aim:
            continue
        return QARecord(
            question_id="",
            scene_id=ctx.graph.scene_id,
            tier=ctx.graph.tier,
            template_id=template.template_id,
            quantifier=template.quantifier,
            question=text,
            answer=answer,
            answer_kind=template.answer_kind,
            program=program,
        )
    return None


def generate_for_scene(temporal: TemporalScene, rng: np.random.Generator,
                       rounds: int = 1, aim_state: dict | None = None,
                       template_ids: tuple[str, ...] | None = None) -> list[QARecord]:
    """One record per applicable template per round.

    Yes/no templates alternate an aimed answer per (tier, template) across
    the whole run (aim_state carries the toggle between scenes) so the raw
    stream is close to balanced before subsampling.
    """
    ctx = _TemplateCtx(temporal)
    records: list[QARecord] = []
    state = aim_state if aim_state is not None else {}
    chosen = template_ids or tuple(TEMPLATES)
    for _ in range(rounds):
        for template_id in chosen:
            template = TEMPLATES[template_id]
            if not template.applicable(temporal):
                continue
            aim = None
            if template.answer_kind == "yes_no":
                key = (temporal.graph.tier, template_id)
                aim = state.get(key, True)
                state[key] = not aim
            record = instantiate(template, temporal, rng, aim=aim, ctx=ctx)
            if record is None and aim is not None:
                record = instantiate(template, temporal, rng, aim=None, ctx=ctx)
            if record is not None:
                records.append(record)
    return records


def balance_yes_no(records: list[QARecord], rng: np.random.Generator,
                   tolerance: float = 0.02) -> list[QARecord]:
    """Subsample yes/no questions per (tier, template) until the yes-rate is
    within tolerance of one half; degenerate one-sided groups pass through
    logged, untouched."""
    drop: set[int] = set()
    groups: dict[tuple[str, str], list[int]] = {}
    for idx, record in enumerate(records):
        if record.answer_kind == "yes_no":
            groups.setdefault((record.tier, record.template_id), []).append(idx)

    for key, indices in sorted(groups.items()):
        yes = [i for i in indices if records[i].answer.data is True]
        no = [i for i in indices if records[i].answer.data is False]
        minority, majority = (yes, no) if len(yes) <= len(no) else (no, yes)
        if not minority:
            log.warning("yes/no group %s is one-sided (%d records); left as-is",
                        key, len(majority))
            continue
        m = len(minority)
        cap = math.floor(m * (0.5 + tolerance) / (0.5 - tolerance))
        keep = min(len(majority), cap)
        while keep > m and keep / (keep + m) > 0.5 + tolerance:
            keep -= 1
        excess = len(majority) - keep
        if excess > 0:
            for pos in rng.choice(len(majority), size=excess, replace=False):
                drop.add(majority[int(pos)])

    return [record for idx, record in enumerate(records) if idx not in drop]
