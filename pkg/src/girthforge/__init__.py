"""High-girth clique decompositions of dense graphs at desk scale."""
from .errors import (BudgetExhausted, ConfigurationOverflow, GirthforgeError, Infeasible, InputError,
                     ProvenInfeasible, SearchFailure)
from .graph import (Config, Graph, clique_index, complete_graph, cycle_graph, enumerate_cliques, cliques_through,
                    graham_blowup, is_divisible, parse_graph, format_graph, read_graph, write_graph)
from .girth import AtLeast, Packing, is_decomposition, packing_girth, find_configuration
from .gadgets import g_sphere, fake_edge, anti_edge, find_absorber, rooted_degeneracy, rooted_girth, verify_booster
from .fractional import solve_fractional, verify_fractional, seeded_fixed, balanced_decomposition, uniform_weighting
from .embedding import SupergraphSystem, embed_system, verify_embedding
from .boosting import sample_reserves, restricted_boost
from .treasury import design_treasury, check_regular, common_projection, omniabsorber_projection
from .matcher import exact_decomposition, find_perfect_matching, assemble_steiner
from .pipeline import OmniAbsorber, build_private_omniabsorber, boost_omniabsorber, collective_girth, run_pipeline

__version__ = "0.1.0"
