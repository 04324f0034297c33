"""The rule catalog: one descriptor per implemented smell."""

from __future__ import annotations

from typing import Final

from . import clojure as c
from . import functional as f
from . import traditional as t
from .base import RuleDescriptor

DEFAULT_EFFECTS: Final = ("println", "print", "prn", "printf", "spit", "slurp", "swap!", "reset!",
                          "alter", "send", "send-off")
WRITE_EFFECTS: Final = tuple(e for e in DEFAULT_EFFECTS if e != "slurp")

CATALOG_SIZE: Final = 26
OUT_OF_SCOPE: Final = ("Shotgun Surgery", "Inappropriate Intimacy")

_CLJ, _FUN, _TRAD = "clojure-specific", "functional", "traditional"

_RULES = [
    RuleDescriptor(
        "unnecessary-macro", _CLJ, "Unnecessary Macros", ("G8",), "heuristic", c.check_unnecessary_macro,
        "A macro whose body never quotes, unquotes or inspects code behaves like a function "
        "but loses first-class use (it cannot be passed to map or apply).",
        "(defmacro add2 [x] (+ x 2))",
        "(defn add2 [x] (+ x 2))",
        survey=88.37),
    RuleDescriptor(
        "non-namespaced-keys", _CLJ, "Namespaced Keys Neglect", ("G1",), "heuristic",
        c.check_non_namespaced_keys,
        "Entity maps built only from unqualified keywords invite key collisions when data "
        "from different domains is merged.",
        '{:id 1 :name "a" :email "b"}',
        '#:user{:id 1 :name "a" :email "b"}',
        params={"min-keys": 3}),
    RuleDescriptor(
        "improper-emptiness-check", _CLJ, "Improper Emptiness Check", ("G2",), "mechanical",
        c.check_improper_emptiness,
        "Emptiness tested through `not`/`empty?` or by comparing `count` with zero; "
        "`seq` and `empty?` say it directly and do not count lazy sequences.",
        "(when (not (empty? xs)) (process xs))",
        "(when (seq xs) (process xs))"),
    RuleDescriptor(
        "missing-map-default", _CLJ, "Accessing non-existent Map Fields", ("G2",), "heuristic",
        c.check_missing_map_default,
        "A two-argument `get` returns nil both for a missing key and for a key mapped to nil. "
        "Disabled by default; enable it where that distinction matters.",
        "(get config :timeout)",
        "(get config :timeout 30)",
        default_enabled=False),
    RuleDescriptor(
        "unnecessary-into", _CLJ, "Unnecessary into", ("G2",), "mechanical", c.check_unnecessary_into,
        "`into` an empty literal collection where a dedicated constructor (vec, set, mapv, filterv) "
        "is shorter and clearer.",
        "(into [] (map inc xs))",
        "(mapv inc xs)"),
    RuleDescriptor(
        "conditional-build-up", _CLJ, "Conditional Build-Up", ("G2",), "mechanical",
        c.check_conditional_buildup,
        "A value rebuilt through consecutive `let` rebindings of the form `(if test (update x) x)`; "
        "`cond->` expresses the same pipeline without repetition.",
        "(let [m {} m (if a (assoc m :a 1) m) m (if b (assoc m :b 2) m)] m)",
        "(cond-> {} a (assoc :a 1) b (assoc :b 2))",
        params={"min-rebinds": 2}),
    RuleDescriptor(
        "verbose-check", _CLJ, "Verbose Checks", ("G2",), "mechanical", c.check_verbose_check,
        "Hand-written comparisons that duplicate a core predicate such as `some?`, `nil?`, `true?` "
        "or `zero?`. Numeric rewrites are reported as info because the predicates throw on non-numbers.",
        "(if (not (nil? user)) (greet user) (login))",
        "(if (some? user) (greet user) (login))",
        survey=71.43),
    RuleDescriptor(
        "production-doall", _CLJ, "Production doall", ("G2",), "mechanical", c.check_production_doall,
        "`doall` outside test code realizes a whole lazy sequence in memory; an eager function "
        "usually states the intent better.",
        "(doall (map transform records))",
        "(mapv transform records)",
        params={"include-dorun": False}),
    RuleDescriptor(
        "redundant-do", _CLJ, "Redundant do Block", ("G2",), "mechanical", c.check_redundant_do,
        "An explicit `do` inside a body that already sequences its forms, or a `do` around a "
        "single expression.",
        "(when ready? (do (log) (start)))",
        "(when ready? (log) (start))"),
    RuleDescriptor(
        "thread-ignorance", _CLJ, "Thread Ignorance", ("G2",), "heuristic", c.check_thread_ignorance,
        "A chain of nested calls all threading the value through the same argument position "
        "reads inside-out; `->` or `->>` reads top to bottom.",
        "(str/upper-case (str/trim (name (first xs))))",
        "(-> xs first name str/trim str/upper-case)",
        params={"min-chain": 4}, survey=76.74),
    RuleDescriptor(
        "nested-forms", _CLJ, "Nested Forms", ("G2",), "heuristic", c.check_nested_forms,
        "A `let`, `doseq` or `for` whose only body form is the same construct; the binding "
        "vectors can be merged.",
        "(let [a 1] (let [b 2] (+ a b)))",
        "(let [a 1 b 2] (+ a b))",
        survey=76.74),
    RuleDescriptor(
        "direct-rt-usage", _CLJ, "Direct Usage of clojure.lang.RT", ("G5",), "mechanical",
        c.check_direct_rt_usage,
        "`clojure.lang.RT` is compiler-internal; calling it couples code to implementation details "
        "that change between releases.",
        "(clojure.lang.RT/count xs)",
        "(count xs)"),
    RuleDescriptor(
        "trivial-lambda", _FUN, "Trivial Lambda", ("G1", "G2"), "mechanical", f.check_trivial_lambda,
        "An anonymous function that only forwards its arguments, in order, to another function.",
        "(map #(inc %) xs)",
        "(map inc xs)"),
    RuleDescriptor(
        "inefficient-filtering", _FUN, "Inefficient Filtering", ("G10",), "heuristic",
        f.check_inefficient_filtering,
        "Generating values and discarding those that fail a predicate, instead of generating "
        "valid values directly.",
        "(ns app.gen (:require [clojure.test.check.generators :as gen]))\n(gen/such-that even? gen/nat)",
        "(ns app.gen (:require [clojure.test.check.generators :as gen]))\n(gen/fmap #(* 2 %) gen/nat)"),
    RuleDescriptor(
        "overabstracted-composition", _FUN, "Overabstracted Composition", ("G1",), "heuristic",
        f.check_overabstracted_composition,
        "Long `comp` pipelines or `comp`/`partial` nested in each other hide the data flow.",
        "(comp (partial map inc) (partial filter even?))",
        "(fn [xs] (->> xs (filter even?) (map inc)))",
        params={"max-comp-arity": 4}),
    RuleDescriptor(
        "deep-nesting", _FUN, "Deeply-nested Call Stacks", ("G1",), "heuristic", f.check_deep_nesting,
        "A function body whose calls nest deeper than the configured limit.",
        "(defn f [x] (a (b (c (d (e x))))))",
        "(defn f [x] (-> x e d c b a))",
        params={"max-depth": 5}, survey=48.78),
    RuleDescriptor(
        "hof-overuse", _FUN, "Overuse of Higher-Order Functions", ("G1",), "heuristic", f.check_hof_overuse,
        "Functions that return functions that return functions: several levels of manual currying.",
        "(fn [a] (fn [b] (fn [c] (+ a b c))))",
        "(fn [a b c] (+ a b c))",
        params={"max-curry": 3}),
    RuleDescriptor(
        "lazy-side-effects", _FUN, "Lazy Side Effects", ("G12",), "heuristic", f.check_lazy_side_effects,
        "Side effects inside a lazy sequence run only when, and if, the sequence is realized.",
        "(map #(println %) xs)",
        "(run! println xs)",
        params={"effects": list(DEFAULT_EFFECTS)}, survey=90.48),
    RuleDescriptor(
        "hidden-side-effects", _FUN, "Hidden Side Effects", ("G1",), "heuristic",
        f.check_hidden_side_effects,
        "A function performs writes or I/O although its name gives no hint; by convention such "
        "functions end in `!`.",
        '(defn save-user [u] (spit "users.edn" u))',
        '(defn save-user! [u] (spit "users.edn" u))',
        params={"effects": list(WRITE_EFFECTS), "allowlist": ["-main"]}, survey=78.57),
    RuleDescriptor(
        "explicit-recursion", _FUN, "Explicit Recursion", ("G1",), "heuristic", f.check_explicit_recursion,
        "Manual recursion, or a loop walking a sequence with first/rest, where `reduce`, `map` or "
        "`filter` would state the intent.",
        "(defn sum [xs] (if (empty? xs) 0 (+ (first xs) (sum (rest xs)))))",
        "(defn sum [xs] (reduce + xs))",
        survey=71.43),
    RuleDescriptor(
        "positional-return", _FUN, "Positional Return Values", ("G2",), "heuristic",
        f.check_positional_return,
        "Every return path yields a vector whose elements are identified only by position.",
        "(defn min-max [xs] [(apply min xs) (apply max xs)])",
        "(defn min-max [xs] {:min (apply min xs) :max (apply max xs)})"),
    RuleDescriptor(
        "long-parameter-list", _TRAD, "Long Parameter List", ("G1", "G2"), "heuristic",
        t.check_long_parameter_list,
        "A function arity with more positional parameters than the configured limit. The rest "
        "parameter and a trailing options map are not counted.",
        "(defn connect [host port user password timeout] ...)",
        "(defn connect [{:keys [host port user password timeout]}] ...)",
        params={"max-params": 4}),
    RuleDescriptor(
        "long-function", _TRAD, "Long Method", ("G1",), "heuristic", t.check_long_function,
        "A function arity whose body spans too many lines or contains too many nested forms.",
        "(defn handle [req] ...40 lines...)",
        "(defn handle [req] (-> req parse validate respond))",
        params={"max-lines": 25, "max-forms": 100}),
    RuleDescriptor(
        "comment-heavy", _TRAD, "Comments", ("G9",), "heuristic", t.check_comment_heavy,
        "A definition whose line comments rival its code, often a sign the code needs better "
        "names. Docstrings and rich comment blocks are not counted.",
        "(defn f [x]\n  ;; add one\n  ;; ...\n  (inc x))",
        '(defn f "Adds one." [x] (inc x))',
        params={"min-comments": 8, "max-ratio": 0.5}),
]

REGISTRY: Final[dict[str, RuleDescriptor]] = {r.rule_id: r for r in _RULES}
PSEUDO_RULES: Final = ("parse-error", "io-error", "config-warning")


def rules_in(category: str) -> list[RuleDescriptor]:
    return [r for r in _RULES if r.category == category]
