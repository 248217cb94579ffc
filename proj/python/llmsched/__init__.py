"""LLM inference job scheduling simulator."""

from ._core import (
    DeadlockError,
    JobSpec,
    MlfqConfig,
    ModelProfile,
    WorkloadConfig,
    __version__,
    decode_iteration_time,
    fig5_trace,
    first_iteration_time,
    generate,
    get_demotion_priority,
    get_highest_priority,
    kv_cache_bytes,
    load_trace,
    preset_names,
    preset_profile,
    run_scenario,
    scenario_names,
    simulate,
    swap_time,
    unit_profile,
)


def verify_fig5():
    """Average JCT per policy on the three-job example."""
    mlfq = MlfqConfig()
    mlfq.num_queues = 4
    out = {}
    for policy in ("fcfs", "mlfq-noapreempt", "skipjoin", "srpt"):
        out[policy] = simulate(fig5_trace(), unit_profile(), policy, mlfq)["avg_jct"]
    return out
