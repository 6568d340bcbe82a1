// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_DATASET_HPP
#define CSIAUG_DATASET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "csiaug/types.hpp"

namespace csiaug {

/// Shared shape and radio parameters for every sample in a dataset.
struct DatasetMeta {
    std::size_t n_subcarriers = 0;
    std::size_t n_ap = 0;
    std::size_t n_rx = 0;
    std::size_t n_samples = 0;
    double bandwidth_hz = 0.0;
    double carrier_hz = 0.0;
    std::string created_from;  // free-text provenance, not persisted in the binary file
};

/// Ordered collection of labeled CSI samples with uniform tensor shape.
struct Dataset {
    DatasetMeta meta;
    std::vector<CsiSample> samples;

    /// Every sample must match the metadata shape; n_samples mirrors size().
    void validate() const {
        if (meta.n_samples != samples.size())
            throw DataError("dataset metadata n_samples does not match stored sample count");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const CsiTensor& t = samples[i].tensor;
            if (t.n_ap() != meta.n_ap || t.n_rx() != meta.n_rx ||
                t.m() != meta.n_subcarriers)
                throw DataError("dataset sample " + std::to_string(i) +
                                " tensor shape disagrees with metadata");
        }
    }
};

}  // namespace csiaug

#endif  // CSIAUG_DATASET_HPP
