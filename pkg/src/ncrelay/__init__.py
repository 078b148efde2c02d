"""Capacity bounds and GP-DF simulation for discrete memoryless noncausal relay channels."""
from .prob import (Alphabet, CondPmf, JointPmf, Pmf, ProbabilityError, binary_entropy,
                   conditional_entropy, conditional_mutual_information, entropy, marginalize,
                   mutual_information)
from .channel import (ChannelError, DeterministicMap, NoncausalRelayChannel, WitnessCF,
                      WitnessCutset, WitnessDF, WitnessGPCF, WitnessGPCFBinned, WitnessGPDF,
                      WitnessGPPDFCF, WitnessNUB, WitnessPDF, build_joint_cf, build_joint_cutset,
                      build_joint_df, build_joint_gp_cf, build_joint_gp_cf_binned,
                      build_joint_gp_df, build_joint_gp_pdf_cf, build_joint_pdf,
                      example_bec_channel, example_bsc_channel, is_degraded, random_channel)
from .bounds import (AnalyticFormInapplicable, BoundKind, ObjectiveValue, bsc_example_capacity,
                     cf_objective, cutset_objective, df_objective, evaluate, gp_cf_binned_objective,
                     gp_cf_objective, gp_df_objective, gp_pdf_cf_objective, nub_objective,
                     pdf_objective)
from .optimizer import (BoundResult, ConfigError, NotDegradedError, SearchConfig, enumerate_maps,
                        maximize, maximize_all, simplex_grid)
from .sim import (ErrorEstimate, SimError, SimParams, SweepCell, example_bec_witness,
                  simulate_gp_df, sweep, typical)
from .fileio import (ChannelFileError, WitnessFileError, parse_channel_file, read_witness,
                     serialize_channel, write_witness)

__version__ = "0.1.0"
