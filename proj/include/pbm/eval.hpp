#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pbm {

enum class PairLabel { genuine, impostor };

const char* to_string(PairLabel l) noexcept;
PairLabel parse_pair_label(const std::string& s);

struct ScoreRecord {
    std::string pair_id;
    std::string subject_a;  // identifies subject and eye
    std::string subject_b;
    double score = 0.0;     // lower = more similar
    PairLabel label = PairLabel::impostor;
    bool no_evidence = false;

    bool operator==(const ScoreRecord&) const = default;
};

using ScoreSet = std::vector<ScoreRecord>;

/// Throws on non-finite scores or labels inconsistent with subject ids.
void validate_scores(const ScoreSet& scores);

/// CSV header: pair_id,subject_a,subject_b,score,label,no_evidence
ScoreSet read_scores_csv(std::istream& in);
ScoreSet read_scores_csv(const std::filesystem::path& path);
void write_scores_csv(const ScoreSet& scores, std::ostream& out);
void write_scores_csv(const ScoreSet& scores, const std::filesystem::path& path);

struct RocPoint {
    double threshold;  // accept when score < threshold
    double far;
    double frr;
};

/// Points ordered by ascending threshold: from (far 0, frr 1) at -inf to
/// (far 1, frr 0) at +inf, with thresholds at midpoints between consecutive
/// distinct scores.
struct RocCurve {
    std::vector<RocPoint> points;
    std::size_t n_genuine = 0;
    std::size_t n_impostor = 0;
};

RocCurve roc(const ScoreSet& scores, bool include_no_evidence = true);

/// Trapezoidal area under (far, 1 - frr).
double auc(const RocCurve& curve);

/// far where far = frr, interpolated linearly between bracketing thresholds.
double eer(const RocCurve& curve);

/// |mean_i - mean_g| / sqrt((var_g + var_i) / 2), sample statistics.
double dprime(const ScoreSet& scores, bool include_no_evidence = true);

struct Metrics {
    std::size_t n_genuine = 0;
    std::size_t n_impostor = 0;
    std::size_t n_no_evidence = 0;
    double auc = 0.0;
    double eer = 0.0;
    double dprime = 0.0;
    bool no_evidence_included = true;
};

Metrics compute_metrics(const ScoreSet& scores, bool include_no_evidence = true);
nlohmann::json to_json(const Metrics& m);
void write_roc_csv(const RocCurve& curve, std::ostream& out);
std::string roc_svg(const RocCurve& curve, int size = 400);

// ---- human trials --------------------------------------------------------

enum class Decision { same_eye, different_eyes, dont_know };
enum class TrialStep { evaluation, verification };

const char* to_string(Decision d) noexcept;
const char* to_string(TrialStep s) noexcept;
Decision parse_decision(const std::string& s);
TrialStep parse_trial_step(const std::string& s);

/// The slice of a completed trial that the accuracy tables need.
struct TrialOutcome {
    std::string trial_id;
    TrialStep step = TrialStep::evaluation;
    std::string annotator_id;
    PairLabel truth = PairLabel::genuine;
    Decision decision = Decision::dont_know;
    std::optional<Decision> prior_decision;  // verification trials only
};

bool is_correct(Decision d, PairLabel truth) noexcept;

struct AccuracyColumn {
    std::size_t n_trials = 0;
    double overall = 0.0;
    double genuine = 0.0;
    double impostor = 0.0;
    double inconclusive = 0.0;
    std::size_t n_annotators = 0;
};

struct HumanAccuracyTable {
    AccuracyColumn evaluation;
    AccuracyColumn verification;
};

/// Correct-decision rates per step; "don't know" counts as not correct and
/// feeds the inconclusive rate.
HumanAccuracyTable human_accuracy_stats(const std::vector<TrialOutcome>& trials);
AccuracyColumn accuracy_column(const std::vector<TrialOutcome>& trials);
std::string format_table(const HumanAccuracyTable& t);
nlohmann::json to_json(const HumanAccuracyTable& t);

/// Decision transitions in verification trials relative to the decision
/// that was shown to the annotator.
struct DecisionChangeTable {
    /// key: "<from>-><to>" using genuine / impostor / unsure
    struct Cell {
        std::size_t incorrect_to_correct = 0;
        std::size_t correct_to_incorrect = 0;
        std::size_t incorrect_to_incorrect = 0;
        std::size_t correct_to_correct = 0;
    };
    std::map<std::string, Cell> transitions;
    std::size_t n_verification = 0;
    std::size_t n_unchanged = 0;

    const Cell& at(const std::string& key) const;
};

DecisionChangeTable decision_change_stats(const std::vector<TrialOutcome>& trials);
std::string format_table(const DecisionChangeTable& t);
nlohmann::json to_json(const DecisionChangeTable& t);

// ---- pairing protocols -----------------------------------------------------

struct Sample {
    std::string image_id;
    std::string subject_id;  // subject and eye
    std::string session;
};

struct SamplePair {
    std::size_t a;
    std::size_t b;
    PairLabel label;
};

/// Every unordered pair of distinct samples.
std::vector<SamplePair> pairs_all_vs_all(const std::vector<Sample>& samples);
/// Unordered pairs whose samples come from different sessions.
std::vector<SamplePair> pairs_cross_session(const std::vector<Sample>& samples);

}  // namespace pbm
