"""Size-indexed approximation stages and the derived algebra interface.

Every universe member i gets a stage: equivalence classes of pairs
(j, t) with j a strictly smaller member and t a depth-bounded term over
j's stage, closed under three clause families (equation instances,
collapse of a class to its name one stage up, node-wise collapse) and
congruence through term structure.  Members with identical strict
down-segments provably share a stage, so stages are memoized on the
down-segment; the restriction check recomputes the literal per-member
reading independently and compares.

The colimit of the stages carries the constructor map (children pushed
to a common stage, wrapped in a node, read off at the successor stage)
and the recursor (stage tables computed by well-founded recursion).
compareWithOracle certifies the whole construction against the
congruence-closure quotient on the shared depth-d fragment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .algebras import Algebra, Value, bind, satisfies
from .diagrams import Colimit, Diagram, colim
from .errors import (
    CoherenceFailure,
    InfinitaryArity,
    NotSatisfying,
    NotStabilized,
    PartialAlgebra,
    QitError,
    StageOverflow,
)
from .quotient import CongruenceQuotient, UnionFind
from .sexpr import show_term
from .sizes import SizeUniverse, SizeVal, show_size, wf_rec
from .terms import (
    Node,
    OpSym,
    Signature,
    SystemOfEquations,
    Tab,
    Term,
    Var,
    enumerate_terms,
    map_term,
    mk_node,
    substitute,
    term_key,
    validate_system,
    weighted_depth,
)


def _token(sid: int, cls: int) -> str:
    return f"~{sid}.{cls}"


@dataclass(frozen=True)
class StageClass:
    flat: Term
    sort: Optional[str]
    fd: int
    pairs: tuple[tuple[int, Term], ...]


@dataclass(frozen=True)
class Stage:
    sid: int
    slices: tuple[int, ...]
    classes: tuple[StageClass, ...]
    class_of_pair: Mapping[tuple[int, Term], int]
    skipped_instances: int

    def __len__(self) -> int:
        return len(self.classes)


def diamond(
    sig: Signature,
    sys: SystemOfEquations,
    depth_bound: int,
    slices: Sequence[Stage],
    fire: set[tuple[int, int]],
    sid: int,
) -> Stage:
    """One quotient stage over the given slice stages.  fire lists the
    (lower, higher) slice pairs that are strictly ordered in the member
    set this stage summarizes; only those pairs admit collapse clauses."""
    for decl in sig.ops:
        if not decl.arity.finite:
            raise InfinitaryArity(f"cannot materialize stages under {decl.op.show()}")

    by_sid = {st.sid: st for st in slices}
    weights: dict[str, int] = {}
    sorts_of: dict[str, Optional[str]] = {}
    for st in slices:
        for c, cls in enumerate(st.classes):
            weights[_token(st.sid, c)] = cls.fd
            sorts_of[_token(st.sid, c)] = cls.sort

    pool: list[tuple[int, Term]] = []
    for st in sorted(slices, key=lambda s: s.sid):
        vars_map = {_token(st.sid, c): cls.sort for c, cls in enumerate(st.classes)}
        local = {name: weights[name] for name in vars_map}
        for t in enumerate_terms(sig, vars_map, depth_bound, var_depths=local):
            pool.append((st.sid, t))
    index = {p: n for n, p in enumerate(pool)}
    uf = UnionFind(len(pool))
    skipped = 0

    # equation instances within one slice
    for st in sorted(slices, key=lambda s: s.sid):
        for eq in sys.equations:
            names = eq.var_names()
            if names is None:
                raise InfinitaryArity(f"equation {eq.name} has a countable variable family")
            pools = []
            for v in names:
                want = eq.sort_of(v)
                pools.append(
                    [c for c, cls in enumerate(st.classes) if want is None or cls.sort == want]
                )
            for combo in itertools.product(*pools):
                env = {v: Var(_token(st.sid, c)) for v, c in zip(names, combo)}
                lhs = substitute(eq.lhs, env)
                rhs = substitute(eq.rhs, env)
                if max(weighted_depth(lhs, weights), weighted_depth(rhs, weights)) > depth_bound:
                    skipped += 1
                    continue
                uf.union(index[(st.sid, lhs)], index[(st.sid, rhs)])

    # collapse clauses along strictly ordered slice pairs
    for low, high in sorted(fire):
        target = by_sid[high]
        for s, t in pool:
            if s != low:
                continue
            cls = target.class_of_pair[(low, t)]
            uf.union(index[(high, Var(_token(high, cls)))], index[(low, t)])
            if isinstance(t, Node):
                lifted = Node(
                    t.op,
                    Tab(
                        tuple(
                            Var(_token(high, target.class_of_pair[(low, ch)]))
                            for ch in t.children.entries
                        )
                    ),
                )
                uf.union(index[(high, lifted)], index[(low, t)])

    # congruence through node structure, across slices
    child_pos = {
        n: tuple(index[(s, ch)] for ch in t.children.entries)
        for n, (s, t) in enumerate(pool)
        if isinstance(t, Node) and t.children.entries
    }
    changed = True
    while changed:
        changed = False
        sigtab: dict[tuple, int] = {}
        for n, kids in child_pos.items():
            key = (pool[n][1].op, tuple(uf.find(k) for k in kids))
            other = sigtab.setdefault(key, n)
            if other != n and uf.union(n, other):
                changed = True

    flat_env = {
        _token(st.sid, c): cls.flat for st in slices for c, cls in enumerate(st.classes)
    }
    groups: dict[int, list[int]] = {}
    for n in range(len(pool)):
        groups.setdefault(uf.find(n), []).append(n)

    ranked = []
    for members in groups.values():
        flats = [substitute(pool[n][1], flat_env) for n in members]
        flat = min(flats, key=lambda t: term_key(sig, t))
        ranked.append((term_key(sig, flat), min(members), flat, members))
    ranked.sort(key=lambda row: (row[0], row[1]))

    classes = []
    class_of_pair: dict[tuple[int, Term], int] = {}
    for cid, (_, _, flat, members) in enumerate(ranked):
        pairs = tuple(pool[n] for n in sorted(members))
        classes.append(
            StageClass(
                flat=flat,
                sort=sig.decl(flat.op).sort,
                fd=weighted_depth(flat),
                pairs=pairs,
            )
        )
        for n in members:
            class_of_pair[pool[n]] = cid

    return Stage(
        sid=sid,
        slices=tuple(sorted(by_sid)),
        classes=tuple(classes),
        class_of_pair=class_of_pair,
        skipped_instances=skipped,
    )


@dataclass
class Approximation:
    sig: Signature
    sys: SystemOfEquations
    universe: SizeUniverse
    depth: int
    stages: tuple[Stage, ...]
    stage_of: Mapping[SizeVal, int]

    def stage_at(self, i: SizeVal) -> Stage:
        return self.stages[self.stage_of[i]]

    def delta(self, i: SizeVal, j: SizeVal, cls: int) -> int:
        """Push a class at member i one stage up to member j."""
        if not self.universe.lt(i, j):
            raise QitError(f"{show_size(i)} is not strictly below {show_size(j)}")
        si = self.stage_of[i]
        return self.stages[self.stage_of[j]].class_of_pair[(si, Var(_token(si, cls)))]

    def check_fixed_diag(self) -> int:
        """Reading a pair off at a higher stage agrees with pushing its
        class up, for every ordered member pair and every pair."""
        u = self.universe
        checked = 0
        seen: set[tuple[int, int]] = set()
        for i in u.members:
            for j in u.members:
                if not u.lt(i, j):
                    continue
                si, sj = self.stage_of[i], self.stage_of[j]
                if (si, sj) in seen:
                    continue
                seen.add((si, sj))
                high = self.stages[sj]
                for pair, ci in self.stages[si].class_of_pair.items():
                    direct = high.class_of_pair[pair]
                    via = high.class_of_pair[(si, Var(_token(si, ci)))]
                    if direct != via:
                        raise QitError(
                            f"stage diagram broken at {show_term(pair[1])} between "
                            f"{show_size(i)} and {show_size(j)}"
                        )
                    checked += 1
        return checked

    def check_restriction(self) -> int:
        """Recompute every member's stage from the literal per-member sum
        (one slice per smaller member, no sharing) and demand the same
        partition.  This is the uniqueness of the shared fixed point."""
        u = self.universe
        literal: dict[int, Stage] = {}
        bij: dict[int, dict[int, int]] = {}
        checked = 0
        for i in u.members:
            pos = u.position(i)
            below = u.below[i]
            fire = {
                (u.position(k), u.position(j))
                for k in below
                for j in below
                if u.lt(k, j)
            }
            lit = diamond(
                self.sig,
                self.sys,
                self.depth,
                [literal[u.position(j)] for j in below],
                fire,
                sid=pos,
            )
            literal[pos] = lit
            shared = self.stage_at(i)
            if len(lit) != len(shared):
                raise QitError(f"restriction mismatch at {show_size(i)}: class counts differ")
            rename = {}
            for j in below:
                pj = u.position(j)
                sj = self.stage_of[j]
                for c, sc in bij[pj].items():
                    rename[_token(pj, c)] = _token(sj, sc)
            # rewrite literal pairs into the shared token and slice space
            shared_lookup = {frozenset(cls.pairs): n for n, cls in enumerate(shared.classes)}
            matched: dict[int, int] = {}
            for c, cls in enumerate(lit.classes):
                grp = frozenset(
                    (self.stage_of[u.members[s]], map_term(t, lambda n: rename.get(n, n)))
                    for s, t in cls.pairs
                )
                n = shared_lookup.get(grp)
                if n is None:
                    raise QitError(f"restriction mismatch at {show_size(i)}: partitions differ")
                matched[c] = n
            bij[pos] = matched
            checked += len(shared.classes)
        return checked

    def to_diagram(self) -> Diagram:
        u = self.universe
        family = {i: tuple(range(len(self.stage_at(i)))) for i in u.members}
        maps = {
            (i, j): {c: self.delta(i, j, c) for c in family[i]}
            for i in u.members
            for j in u.members
            if u.lt(i, j)
        }
        return Diagram(u, family, maps)

    def dump(self) -> str:
        return (
            "\n".join(
                f"stage {show_size(i)}: {len(self.stage_at(i))}" for i in self.universe.members
            )
            + "\n"
        )

    def export(self) -> str:
        lines = [f"depth {self.depth} height {self.universe.height}"]
        for i in self.universe.members:
            lines.append(f"member {show_size(i)} -> stage {self.stage_of[i]}")
        for st in self.stages:
            slices = " ".join(str(s) for s in st.slices)
            lines.append(f"stage {st.sid}: slices ({slices}) classes {len(st)}")
            for c, cls in enumerate(st.classes):
                lines.append(f"  class {c} {show_term(cls.flat)} | pairs {len(cls.pairs)}")
        return "\n".join(lines) + "\n"


def _member_at(u: SizeUniverse, stage_of, sid: int) -> SizeVal:
    for m in u.members:
        if stage_of[m] == sid:
            return m
    raise QitError(f"no member realizes stage {sid}")


def build_fixed_point(
    sig: Signature, sys: SystemOfEquations, u: SizeUniverse, depth_bound: int
) -> Approximation:
    validate_system(sig, sys)
    stages: list[Stage] = []
    by_key: dict[frozenset[int], int] = {}
    stage_of: dict[SizeVal, int] = {}

    def step(i: SizeVal, below_vals: Mapping[SizeVal, object]) -> int:
        key = frozenset(u.position(j) for j in u.below[i])
        sid = by_key.get(key)
        if sid is None:
            slice_sids = sorted({stage_of[j] for j in u.below[i]})
            fire = {
                (stage_of[k], stage_of[j])
                for k in u.below[i]
                for j in u.below[i]
                if u.lt(k, j)
            }
            sid = len(stages)
            stages.append(
                diamond(sig, sys, depth_bound, [stages[s] for s in slice_sids], fire, sid=sid)
            )
            by_key[key] = sid
        stage_of[i] = sid
        return sid

    wf_rec(u, step)
    appx = Approximation(
        sig=sig,
        sys=sys,
        universe=u,
        depth=depth_bound,
        stages=tuple(stages),
        stage_of=dict(stage_of),
    )
    appx.check_fixed_diag()
    appx.check_restriction()
    return appx


@dataclass(frozen=True)
class QwequateReport:
    checked: int
    depth_skipped: int
    intro_checked: int
    intro_overflow: int


@dataclass(frozen=True)
class StabilityReport:
    confirmed: int
    skipped: int
    failed: int

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class ConstructionRec:
    by_class: dict[int, Value]
    stage_tables: Mapping[int, Mapping[int, Value]]
    coherence_checked: int


@dataclass(frozen=True)
class UniquenessReport:
    is_hom: bool
    hom_failures: tuple[str, ...]
    agrees: bool
    first_discrepancy: Optional[tuple[int, Value, Value]]

    @property
    def ok(self) -> bool:
        return self.is_hom and self.agrees


class QwInterface:
    """Constructor, recursor, and checks on the stage colimit."""

    def __init__(self, appx: Approximation):
        self.appx = appx
        self.diagram = appx.to_diagram()
        self.colimit = colim(self.diagram)
        self.colimit.check_cocone()

    def __len__(self) -> int:
        return len(self.colimit)

    def inject(self, i: SizeVal, cls: int) -> int:
        return self.colimit.inject(i, cls)

    def class_flat(self, cid: int) -> Term:
        appx = self.appx
        flats = [appx.stage_at(m).classes[c].flat for m, c in self.colimit.classes[cid]]
        return min(flats, key=lambda t: term_key(appx.sig, t))

    def _push(self, i: SizeVal, cid: int) -> Optional[int]:
        appx = self.appx
        st = appx.stage_at(i)
        for m, c in self.colimit.classes[cid]:
            if m == i:
                return c
            if appx.universe.lt(m, i):
                sm = appx.stage_of[m]
                return st.class_of_pair[(sm, Var(_token(sm, c)))]
        return None

    def qwintro(self, op: Union[OpSym, str], children: Sequence[int]) -> int:
        appx = self.appx
        u = appx.universe
        for i in u.members:
            pushed = []
            for cid in children:
                c = self._push(i, cid)
                if c is None:
                    break
                pushed.append(c)
            if len(pushed) != len(children):
                continue
            si = appx.stage_of[i]
            t = mk_node(appx.sig, op, [Var(_token(si, c)) for c in pushed])
            sup = u.sig.suc(i)
            if sup not in u:
                raise StageOverflow(
                    f"no stage above {show_size(i)} in a height-{u.height} universe"
                )
            cls = appx.stage_at(sup).class_of_pair.get((si, t))
            if cls is None:
                raise StageOverflow(f"intro exceeds depth {appx.depth} at {show_size(i)}")
            return self.inject(sup, cls)
        raise StageOverflow("children have no common stage in the universe")

    def _fold_at(self, i: SizeVal, t: Term) -> int:
        if isinstance(t, Var):
            cls = int(t.name.split(".")[1])
            return self.inject(i, cls)
        return self.qwintro(t.op, [self._fold_at(i, c) for c in t.children.entries])

    def check_qwequate(self) -> QwequateReport:
        """Every materialized equation instance lands in one class at the
        successor stage, and folding either side through the constructor
        gives that same colimit class."""
        appx = self.appx
        u = appx.universe
        checked = depth_skipped = intro_checked = intro_overflow = 0
        for i in u.members:
            sup = u.sig.suc(i)
            if sup not in u:
                continue
            si = appx.stage_of[i]
            st = appx.stages[si]
            high = appx.stage_at(sup)
            weights = {_token(si, c): cls.fd for c, cls in enumerate(st.classes)}
            for eq in appx.sys.equations:
                names = eq.var_names()
                pools = []
                for v in names:
                    want = eq.sort_of(v)
                    pools.append(
                        [c for c, cls in enumerate(st.classes) if want is None or cls.sort == want]
                    )
                for combo in itertools.product(*pools):
                    env = {v: Var(_token(si, c)) for v, c in zip(names, combo)}
                    lhs, rhs = substitute(eq.lhs, env), substitute(eq.rhs, env)
                    if max(weighted_depth(lhs, weights), weighted_depth(rhs, weights)) > appx.depth:
                        depth_skipped += 1
                        continue
                    cl = high.class_of_pair[(si, lhs)]
                    cr = high.class_of_pair[(si, rhs)]
                    if cl != cr:
                        raise CoherenceFailure(
                            f"instance of {eq.name} splits at stage above {show_size(i)}",
                            witness=(show_term(lhs), show_term(rhs)),
                        )
                    checked += 1
                    try:
                        vl = self._fold_at(i, lhs)
                        vr = self._fold_at(i, rhs)
                    except StageOverflow:
                        intro_overflow += 1
                        continue
                    if not (vl == vr == self.inject(sup, cl)):
                        raise CoherenceFailure(
                            f"fold of {eq.name} disagrees with the successor reading",
                            witness=(show_term(lhs), show_term(rhs)),
                        )
                    intro_checked += 1
        return QwequateReport(checked, depth_skipped, intro_checked, intro_overflow)

    def qwrec(self, alg: Algebra) -> ConstructionRec:
        appx = self.appx
        u = appx.universe
        report = satisfies(alg, appx.sys, "exhaustive")
        if report.status != "SATISFIED":
            raise NotSatisfying(
                f"algebra violates {report.witness_eq}" if report.witness_eq else "algebra violates the system"
            )

        tables: dict[int, dict[int, Value]] = {}

        def step(i: SizeVal, below_vals):
            sid = appx.stage_of[i]
            if sid in tables:
                return sid
            st = appx.stages[sid]
            env = {
                _token(s, c): tables[s][c]
                for s in st.slices
                for c in range(len(appx.stages[s].classes))
            }
            vals: dict[int, Value] = {}
            for pair, cls in st.class_of_pair.items():
                v = bind(pair[1], env, alg)
                if cls in vals and vals[cls] != v:
                    raise CoherenceFailure(
                        f"recursion incompatible at stage {sid}",
                        witness=show_term(st.classes[cls].flat),
                    )
                vals[cls] = v
            tables[sid] = vals
            return sid

        wf_rec(u, step)

        coherence = 0
        seen: set[tuple[int, int]] = set()
        for i in u.members:
            for j in u.below[i]:
                sj, si = appx.stage_of[j], appx.stage_of[i]
                if (sj, si) in seen:
                    continue
                seen.add((sj, si))
                for c in range(len(appx.stages[sj].classes)):
                    if tables[sj][c] != tables[si][appx.delta(j, i, c)]:
                        raise CoherenceFailure(
                            f"recursion not constant along {show_size(j)} -> {show_size(i)}",
                            witness=show_term(appx.stages[sj].classes[c].flat),
                        )
                    coherence += 1

        by_class: dict[int, Value] = {}
        for cid, grp in enumerate(self.colimit.classes):
            values = {tables[appx.stage_of[m]][c] for m, c in grp}
            if len(values) != 1:
                raise QitError("recursion values disagree across a colimit class")
            by_class[cid] = values.pop()
        return ConstructionRec(by_class, tables, coherence)

    def check_uniqueness(self, alg: Algebra, h: Mapping[int, Value]) -> UniquenessReport:
        """A candidate map out of the colimit is the recursor iff it
        commutes with every materialized node application."""
        appx = self.appx
        failures: list[str] = []
        for sid, st in enumerate(appx.stages):
            m = _member_at(appx.universe, appx.stage_of, sid)
            for pair, cls in st.class_of_pair.items():
                s, t = pair
                if not isinstance(t, Node):
                    continue
                node_cid = self.inject(m, cls)
                child_cids = [
                    self.inject(m, st.class_of_pair[(s, ch)]) for ch in t.children.entries
                ]
                try:
                    expected = alg.interp(t.op, [h[c] for c in child_cids])
                except PartialAlgebra:
                    failures.append(show_term(st.classes[cls].flat))
                    continue
                if expected != h[node_cid]:
                    failures.append(show_term(st.classes[cls].flat))
        rec = self.qwrec(alg)
        discrepancy = None
        for cid, v in rec.by_class.items():
            if h.get(cid) != v:
                discrepancy = (cid, h.get(cid), v)
                break
        return UniquenessReport(
            is_hom=not failures,
            hom_failures=tuple(failures),
            agrees=discrepancy is None,
            first_discrepancy=discrepancy,
        )

    def check_intro_stability(self) -> StabilityReport:
        """Pushing a materialized term up before reading it off agrees,
        at some higher stage, with reading it off directly; pairs with
        nothing above them in the universe are counted as skipped."""
        appx = self.appx
        u = appx.universe
        confirmed = skipped = failed = 0
        seen: set[tuple[int, int]] = set()
        for i in u.members:
            for j in u.members:
                if not u.lt(i, j):
                    continue
                si, sj = appx.stage_of[i], appx.stage_of[j]
                if (si, sj) in seen:
                    continue
                seen.add((si, sj))
                rename = {
                    _token(si, c): _token(sj, appx.delta(i, j, c))
                    for c in range(len(appx.stages[si].classes))
                }
                uppers = [k for k in u.members if u.lt(j, k)]
                terms_over_i = [
                    pair[1] for pair in appx.stages[sj].class_of_pair if pair[0] == si
                ]
                for t in terms_over_i:
                    if not uppers:
                        skipped += 1
                        continue
                    mapped = map_term(t, lambda n: rename.get(n, n))
                    hit = False
                    for k in uppers:
                        top = appx.stage_at(k)
                        if top.class_of_pair[(sj, mapped)] == top.class_of_pair[(si, t)]:
                            hit = True
                            break
                    if hit:
                        confirmed += 1
                    else:
                        failed += 1
        return StabilityReport(confirmed, skipped, failed)


def qw_from_colimit(appx: Approximation) -> QwInterface:
    return QwInterface(appx)


@dataclass(frozen=True)
class OracleComparison:
    class_pairs: tuple[tuple[int, int], ...]
    per_sort: Mapping[Optional[str], int]
    intro_checked: int

    @property
    def ok(self) -> bool:
        return True


def compare_with_oracle(appx: Approximation, q: CongruenceQuotient) -> OracleComparison:
    """Certify that colimit classes and congruence classes agree on the
    depth-bounded fragment: flattening is a bijection commuting with the
    constructor."""
    qw = qw_from_colimit(appx)
    mapping: dict[int, int] = {}
    for cid, grp in enumerate(qw.colimit.classes):
        oids = set()
        for m, c in grp:
            flat = appx.stage_at(m).classes[c].flat
            if q.universe.position(flat) is None:
                raise QitError(f"flattening {show_term(flat)} escaped the oracle universe")
            oids.add(q.class_id(flat))
        if len(oids) != 1:
            raise QitError("a colimit class straddles congruence classes")
        mapping[cid] = oids.pop()

    reverse: dict[int, int] = {}
    for cid in sorted(mapping):
        oid = mapping[cid]
        if oid in reverse:
            raise NotStabilized(
                "two colimit classes flatten into one congruence class; raise the height",
                witness=(show_term(qw.class_flat(reverse[oid])), show_term(qw.class_flat(cid))),
            )
        reverse[oid] = cid
    missing = [oid for oid in range(len(q)) if oid not in reverse]
    if missing:
        raise NotStabilized(
            f"{len(missing)} congruence classes have no colimit counterpart; raise the height",
            witness=tuple(missing),
        )

    intro_checked = 0
    for t in q.universe.terms:
        child_cids = [reverse[q.class_id(c)] for c in t.children.entries]
        cid = qw.qwintro(t.op, child_cids)
        if mapping[cid] != q.class_id(t):
            raise QitError(f"constructor mismatch at {show_term(t)}")
        intro_checked += 1

    per_sort: dict[Optional[str], int] = {}
    for cid in mapping:
        sort = appx.sig.decl(qw.class_flat(cid).op).sort
        per_sort[sort] = per_sort.get(sort, 0) + 1

    return OracleComparison(
        class_pairs=tuple(sorted(mapping.items())),
        per_sort=per_sort,
        intro_checked=intro_checked,
    )
