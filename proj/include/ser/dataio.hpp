#pragma once

#include <string>
#include <vector>

#include "ser/matrix.hpp"

namespace ser {

struct Utterance {
    std::string id;
    std::string speaker_id;
    std::string session_id;
    std::string label;
};

struct FeatureTable {
    std::vector<Utterance> rows;
    Matrix X;  // n x m
    std::vector<std::string> column_names;

    std::size_t n() const { return rows.size(); }
    std::size_t m() const { return X.cols(); }
};

struct AudioClip {
    std::vector<double> samples;  // mono, in [-1, 1]
    int sample_rate = 0;
};

// CSV with header `id,speaker,session,label,<feature names...>`.
FeatureTable load_feature_csv(const std::string& path);
void write_table_csv(const FeatureTable& table, const std::string& path);

// PCM WAV (16-bit int or 32-bit float); multichannel is mean-downmixed.
AudioClip load_wav(const std::string& path);

// Select a subset of rows (and the matching X rows), preserving order.
FeatureTable subset_rows(const FeatureTable& table, const std::vector<int>& indices);

// Replace the feature block, keeping metadata; names default to dim0..dim{L-1}.
FeatureTable with_features(const FeatureTable& table, Matrix x,
                           std::vector<std::string> names = {});

// Column concatenation of two tables matched row-by-row on utterance id.
FeatureTable fuse_tables(const FeatureTable& a, const FeatureTable& b);

}  // namespace ser
