# Copyright 2026 The DIPPM Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Predict inference latency, memory and energy of a model graph."""

from dippm._core import (
    DippmError,
    Graph,
    Model,
    Record,
    build_zoo_model,
    compute_macs,
    create_graph_encoding,
    load_model,
    make_record,
    mig_profile,
    oracle_labels,
    parse_graph,
    read_dataset,
    run_cli,
    split,
    static_features,
    synth_dataset,
    train,
    write_dataset,
)

__all__ = [
    "DippmError",
    "Graph",
    "Model",
    "Record",
    "build_zoo_model",
    "compute_macs",
    "create_graph_encoding",
    "load_model",
    "make_record",
    "mig_profile",
    "oracle_labels",
    "parse_graph",
    "read_dataset",
    "run_cli",
    "split",
    "static_features",
    "synth_dataset",
    "train",
    "write_dataset",
]
