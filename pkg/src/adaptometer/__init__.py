"""adaptometer: long-term syntactic adaptation measurement for dialogue corpora."""

from .treebank import ProductionRule, SyntaxTree, extract_rules, parse_bracketed, serialize
from .corpus import (
    Conversation, CorpusStats, SplitSections, SplitTooShort, Utterance,
    attach_rules, corpus_stats, load_corpus, split_corpus, split_prime_target,
    write_corpus,
)
from .sampling import (
    PrimeSample, RuleFrequencyTable, SampleTable, SamplingConfig,
    build_frequency_table, build_samples, center, filter_rules,
)
from .glmm import (
    FitResult, LogisticModel, MixedLogisticModel, ModelFormula, RandomTerm,
    backward_select, build_design, default_formula, fit_glmm, fit_logistic,
    wald_report, wald_z_p,
)
from .divergence import (
    RuleDistribution, TrajectoryReport, bootstrap_trajectory, jsd,
    pairwise_jsd_matrix, rule_distribution, split_trajectory,
)
from .synth import SynthConfig, expected_repetition_gain, generate_corpus
from .genconv import (
    GenerationConfig, PERSONAS, PersonaSpec, RepetitionVerdict, ScriptedTransport,
    build_system_prompt, detect_repetition, generate_round_robin, run_conversation,
)

__version__ = "0.1.0"
