#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbm/bsif.hpp"
#include "pbm/detection.hpp"
#include "pbm/eval.hpp"
#include "pbm/matching.hpp"
#include "pbm/service/store.hpp"

namespace pbm::service {

inline constexpr std::size_t kMinAnnotations = 5;
inline constexpr std::size_t kPlanGenuine = 10;
inline constexpr std::size_t kPlanImpostor = 10;
inline constexpr double kDefaultLowPmiHours = 72.0;

struct PairSide {
    std::string image_id;
    std::string subject_id;
    Eye eye = Eye::left;
    double pmi_hours = 0.0;
    std::string image;       // path to grayscale PNG
    std::string mask;        // path to mask PNG
    std::string detections;  // path to detection JSON

    bool operator==(const PairSide&) const = default;
};

struct PairEntry {
    std::string pair_id;
    PairSide a;
    PairSide b;

    /// Genuine iff both sides show the same subject's same eye.
    PairLabel label() const noexcept;
    bool operator==(const PairEntry&) const = default;
};

enum class AnnotationRole { matching, nonmatching };

/// A human-drawn feature. Matching annotations link one polygon on each
/// image; nonmatching ones carry exactly one polygon.
struct Annotation {
    std::string id;
    AnnotationRole role = AnnotationRole::matching;
    std::optional<Polygon> polygon_a;
    std::optional<Polygon> polygon_b;

    bool operator==(const Annotation&) const = default;
};

struct TrialRecord {
    std::string trial_id;
    TrialStep step = TrialStep::evaluation;
    std::string pair_id;
    std::string annotator_id;
    bool open = true;
    std::optional<Decision> decision;
    std::vector<Annotation> annotations;
    std::optional<std::string> prior_trial;
    std::vector<std::string> shown_prior_annotations;
    std::optional<std::string> verified_by;  // evaluation trials claimed for verification
    std::string created_at;
    std::string submitted_at;

    bool operator==(const TrialRecord&) const = default;
};

struct TrialPlan {
    std::string annotator_id;
    std::uint64_t seed = 0;
    std::vector<std::string> pair_ids;
    std::size_t n_genuine = 0;
    std::size_t n_impostor = 0;

    bool operator==(const TrialPlan&) const = default;
};

struct PoolPair {
    std::string pair_id;
    PairLabel label = PairLabel::genuine;
};

/// 10 genuine + 10 impostor pairs drawn from the pool and shuffled; a pure
/// function of (annotator_id, seed, pool).
TrialPlan plan_trials(const std::string& annotator_id, const std::vector<PoolPair>& pool, std::uint64_t seed);

using PoolFilter = std::function<bool(const PairEntry&)>;

/// Keeps pairs where at least one eye was imaged at or below the PMI threshold.
PoolFilter low_pmi_filter(double max_hours = kDefaultLowPmiHours);

struct Review {
    std::string review_id;
    std::string pair_id;
    std::string annotator_id;
    bool agree = false;
    std::string created_at;

    bool operator==(const Review&) const = default;
};

struct ServiceConfig {
    std::filesystem::path data_dir;
    std::uint64_t seed = 1;
    CompareConfig compare;
    PoolFilter pool_filter;  // empty: every registered pair is eligible
    std::function<std::string()> clock;  // empty: UTC wall clock
};

/// The trial workflow and comparison archive. Every state change is an
/// event appended to <data_dir>/records.ndjson before it is applied; the
/// in-memory index is rebuilt by replaying that log on construction.
class Service {
public:
    Service(ServiceConfig config, FilterBank bank);

    PairEntry register_pair(const PairEntry& pair);
    std::optional<PairEntry> pair(const std::string& pair_id) const;

    /// Returns the annotator's open trial for the step, or opens the next one.
    TrialRecord next_trial(const std::string& annotator_id, TrialStep step);
    TrialRecord next_verification_trial(const std::string& annotator_id);
    std::optional<TrialRecord> trial(const std::string& trial_id) const;
    std::optional<TrialPlan> plan(const std::string& annotator_id) const;
    /// Trial plus what the client must show: for verification trials the
    /// prior decision and exactly the chosen subset of prior annotations.
    nlohmann::json trial_payload(const TrialRecord& trial) const;

    /// `annotator_id`, when given, must own the trial.
    TrialRecord submit_decision(const std::string& trial_id, Decision decision, std::vector<Annotation> annotations,
                                const std::optional<std::string>& annotator_id = std::nullopt);

    /// Computes (or returns the stored) comparison for the current configuration.
    ComparisonResult run_comparison(const std::string& pair_id);
    std::optional<ComparisonResult> result(const std::string& pair_id) const;
    std::size_t stored_comparisons() const;

    Review record_review(const std::string& pair_id, const std::string& annotator_id, bool agree);
    std::vector<Review> reviews(const std::string& pair_id) const;

    std::vector<TrialOutcome> outcomes() const;
    HumanAccuracyTable human_stats() const;
    DecisionChangeTable change_stats() const;

    /// Validation constants shared with clients.
    nlohmann::json client_config() const;

    /// Canonical serialization of the whole index.
    std::string state_dump() const;

    /// Evidence SVG for a stored result, rendered over freshly preprocessed crops.
    std::string evidence_svg(const std::string& pair_id) const;

    const std::filesystem::path& log_path() const noexcept { return log_.path(); }
    std::string config_key() const;

private:
    struct Index {
        std::map<std::string, PairEntry> pairs;
        std::map<std::string, TrialPlan> plans;
        std::map<std::string, TrialRecord> trials;
        std::map<std::string, std::map<std::string, nlohmann::json>> comparisons;  // pair -> config key -> result
        std::map<std::string, Review> reviews;
    };

    void commit(const nlohmann::json& event);   // caller holds the write lock
    static void apply(Index& index, const nlohmann::json& event);
    static nlohmann::json dump_index(const Index& index);

    std::string now() const;
    std::string next_trial_id() const;
    std::optional<TrialRecord> open_trial_for(const std::string& annotator_id, TrialStep step) const;
    TrialRecord open_verification_locked(const std::string& annotator_id);
    SideInput load_side(const PairSide& side) const;

    ServiceConfig config_;
    FilterBank bank_;
    std::string config_key_;
    RecordLog log_;
    mutable std::shared_mutex mutex_;
    Index index_;
};

nlohmann::json to_json(const PairEntry& p);
PairEntry pair_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialRecord& t);
TrialRecord trial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialPlan& p);
TrialPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Review& r);
Review review_from_json(const nlohmann::json& j);

/// Shape and count rules for a decision; throws ErrorKind::invalid_argument.
void validate_submission(Decision decision, const std::vector<Annotation>& annotations);

}  // namespace pbm::service
