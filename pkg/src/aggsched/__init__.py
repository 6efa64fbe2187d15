"""Q-learning scheduling for minimum-latency, collision-free data aggregation."""

from .baseline import baseline_schedule, bfs_tree, brute_force_optimal
from .batch_builder import Partition, apply_batch, eligible_initial_senders, greedy_spread
from .kernel import COMPILED
from .qlearn import QTable, TrainConfig, evaluate_greedy, solve, train
from .schedule import Schedule, delay_of, reverse_schedule, schedule_to_tree, validate_schedule
from .topology import Topology, build_adjacency, generate_topology, is_connected

__version__ = "0.1.0"
