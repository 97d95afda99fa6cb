#!/usr/bin/env python3
# Copyright 2026 The Facegate Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the tiny ONNX models used by the provider tests.

Every model averages the normalized input over its spatial axes (giving one
value per channel) and applies a fixed affine map, so tests can predict the
output from the input colour alone.

    python3 tools/make_onnx_fixtures.py tests/fixtures/onnx
"""
import sys
from pathlib import Path

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper


def affine_model(name, size, weight, bias):
    out_dim = weight.shape[0]
    x = helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, size, size])
    y = helper.make_tensor_value_info("output", TensorProto.FLOAT, [1, out_dim])
    nodes = [
        helper.make_node("ReduceMean", ["input"], ["pooled"], axes=[2, 3], keepdims=0),
        helper.make_node("Gemm", ["pooled", "W", "b"], ["output"], transB=1),
    ]
    init = [
        numpy_helper.from_array(weight.astype(np.float32), "W"),
        numpy_helper.from_array(bias.astype(np.float32), "b"),
    ]
    graph = helper.make_graph(nodes, name, [x], [y], init)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 11)])
    model.ir_version = 6
    onnx.checker.check_model(model)
    return model


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260101)

    w = rng.uniform(-1.0, 1.0, size=(512, 3))
    b = rng.uniform(-0.5, 0.5, size=(512,))
    onnx.save(affine_model("embed", 112, w, b), out / "embed.onnx")
    np.savetxt(out / "embed_weights.txt", np.concatenate([w, b[:, None]], axis=1), fmt="%.9g")

    onnx.save(affine_model("embed_short", 112, np.ones((10, 3)), np.zeros(10)),
              out / "embed_short.onnx")

    onnx.save(affine_model("pose", 112, np.zeros((3, 3)), np.array([10.0, -5.0, 0.0])),
              out / "pose.onnx")
    onnx.save(affine_model("pose_wide", 112, np.zeros((3, 3)), np.array([500.0, -200.0, 7.0])),
              out / "pose_wide.onnx")

    # Two detections, normalized [x1 y1 x2 y2 score lx ly rx ry].
    rows = np.array([
        [0.25, 0.25, 0.50, 0.50, 0.90, 0.32, 0.35, 0.43, 0.35],
        [0.60, 0.10, 0.70, 0.20, 0.20, 0.62, 0.14, 0.68, 0.14],
    ])
    onnx.save(affine_model("detector", 320, np.zeros((18, 3)), rows.reshape(-1)),
              out / "detector.onnx")

    (out / "not_a_model.onnx").write_bytes(b"this is not a protobuf\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/onnx")
