#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dysalign/aligner.hpp"
#include "dysalign/simulator.hpp"
#include "dysalign/token.hpp"

namespace dysalign {

/// Class 0 is blank, class i+1 is inventory phoneme i.
inline constexpr std::size_t kEmissionClasses = kPhonemeCount + 1;

/// T x 40 row-stochastic posterior grid.
struct EmissionMatrix {
    std::size_t frames = 0;
    std::size_t classes = kEmissionClasses;
    double frame_ms = 20.0;
    std::vector<double> data;  // row-major

    double at(std::size_t t, std::size_t c) const { return data[t * classes + c]; }
    double& at(std::size_t t, std::size_t c) { return data[t * classes + c]; }
    std::size_t argmax(std::size_t t) const;

    /// Throws DataError unless every row sums to 1 within `tolerance`.
    void validate(double tolerance = 1e-9) const;
};

/// Half-open frame interval occupied by one token.
struct FrameSpan {
    Token token;
    std::size_t start_frame = 0;
    std::size_t end_frame = 0;

    friend bool operator==(const FrameSpan&, const FrameSpan&) = default;
};

/// Per-token duration in frames: round(median * exp(sigma * z)) clamped to
/// [min_frames, max_frames].
struct DurationModel {
    double median_frames = 5.0;
    double sigma = 0.4;
    std::size_t min_frames = 2;
    std::size_t max_frames = 20;
    std::uint64_t seed = 0;
};

/// 1 - epsilon of each frame's mass stays on the true class. Of the leaked
/// epsilon, `confusion_bias` goes to the other members of the true class's
/// category and the rest is spread uniformly over all other classes.
struct EmissionNoise {
    double epsilon = 0.0;
    double confusion_bias = 0.5;

    void validate() const;
};

struct SynthesizedEmissions {
    EmissionMatrix matrix;
    std::vector<FrameSpan> gold;  // one per dysfluent token, trailing blank excluded
};

/// Each token occupies its drawn duration followed by one blank frame.
SynthesizedEmissions synthesize_emissions(const TokenSequence& dys, const DurationModel& durations,
                                          const EmissionNoise& noise, double frame_ms = 20.0);

struct DecodeResult {
    TokenSequence tokens;
    std::vector<FrameSpan> spans;
};

/// Per-frame argmax, repeats collapsed, blanks dropped. Each token's span is
/// its contiguous argmax run.
DecodeResult ctc_greedy_decode(const EmissionMatrix& emissions);

struct SegmentEntry {
    bool missing = false;
    double start_ms = 0.0;  // == end_ms == anchor when missing
    double end_ms = 0.0;

    friend bool operator==(const SegmentEntry&, const SegmentEntry&) = default;
};

/// One entry per reference token.
struct Segmentation {
    std::vector<SegmentEntry> entries;
};

/// Projects reference tokens onto a timeline given the alignment of the
/// reference to a sequence of timed tokens. A missing token is anchored at
/// the end of the previous realized group, or 0.
Segmentation project_segmentation(const GoldAlignment& alignment, const std::vector<FrameSpan>& spans,
                                  double frame_ms);

/// Decode, align the decoded sequence to `reference`, project.
Segmentation segment(const TokenSequence& reference, const EmissionMatrix& emissions,
                     const Aligner& aligner);

/// Segmentation implied by a record's gold alignment and gold spans.
Segmentation gold_segmentation(const CorpusRecord& record, const std::vector<FrameSpan>& gold_spans,
                               double frame_ms);

struct BoundaryLoss {
    double sum_squared_ms = 0.0;
    std::size_t endpoints = 0;

    bool defined() const { return endpoints > 0; }
    double mse() const;   // ms^2
    double rmse() const;  // ms
    BoundaryLoss& operator+=(const BoundaryLoss& o) {
        sum_squared_ms += o.sum_squared_ms;
        endpoints += o.endpoints;
        return *this;
    }
};

/// Squared error over start and end of every reference token touched by an
/// event (restricted to `scope` when given). Undefined (0 endpoints) when no
/// event is in scope.
BoundaryLoss boundary_loss(const Segmentation& pred, const Segmentation& gold,
                           const std::vector<DysfluencyEvent>& events,
                           std::optional<DysfluencyKind> scope = std::nullopt);

// ---------------------------------------------------------------------------
// Persistence

/// Binary container: magic "DYSEMIT\0", u32 version, u32 frames, u32 classes,
/// f32 frame_ms, row-major little-endian float32 posteriors.
void write_emissions(const std::string& path, const EmissionMatrix& emissions);
EmissionMatrix read_emissions(const std::string& path);
void write_gold_spans(const std::string& path, const std::vector<FrameSpan>& spans, double frame_ms);
std::vector<FrameSpan> read_gold_spans(const std::string& path);

}  // namespace dysalign
