# To add a new cell, type '# %%'
# To add a new markdown cell, type '# %% [markdown]'
# %%
import numpy as np
from termcolor import colored

from resto.experiments import RunConfig, utils
from resto.pipeline import run_pipeline, summarize
from resto.quantize import train_codebooks
from resto.simulate import MixtureDataset, synthesize_dataset


# %%
cfg = RunConfig.from_file("config.json")


# %%
# a small simulated corpus: every record is dry, reverberant, noise and mixture
manifest = synthesize_dataset(utils.build_dataset_config(cfg), cfg["seed"], "data")
dataset = MixtureDataset(manifest)
print(f"{len(dataset)} records in {manifest}")


# %%
adapter = utils.build_adapter_config(cfg)
features = utils.load_training_features(dataset.entries, dataset.root_dir, adapter)
print(features.shape)


# %%
# same features, same training budget, different quantizers
schemes = ["sq", "rvq", "sq_rvq", "sq_par_rvq"]
results = {}

for scheme in schemes:
    scheme_cfg = cfg.with_overrides([f"quantizer.scheme={scheme}"])
    stack = utils.build_stack(scheme_cfg)
    train_codebooks(stack, features, utils.build_train_config(scheme_cfg))

    pipeline_cfg = utils.build_pipeline_config(scheme_cfg, stack)
    rows = []
    for i in range(len(dataset)):
        out = run_pipeline(dataset[i], pipeline_cfg)
        row = {"id": dataset.entries[i].id, "snr_db": dataset.entries[i].snr_db}
        row.update(out.metrics)
        rows.append(row)
    results[scheme] = summarize(rows)[0]


# %%
for scheme, mean in results.items():
    si_sdr_dry = f"{mean['si_sdr_dry']:.3f}"
    print(
        colored(f"{scheme:>12}", "yellow"),
        f'si_sdr_dry {colored(si_sdr_dry, "blue", attrs=["bold"])}',
        f"lsd {mean['lsd']:.3f}",
        f"feature_mse {mean['feature_mse']:.6f}",
    )


# %%
# the hybrid should not lose to the scalar grid alone
print(np.sign(results["sq"]["feature_mse"] - results["sq_rvq"]["feature_mse"]))
