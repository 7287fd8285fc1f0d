#include "pbm/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <set>

#include "pbm/error.hpp"
#include "pbm/report.hpp"
#include "pbm/rng.hpp"

namespace pbm::service {

using nlohmann::json;

PairLabel PairEntry::label() const noexcept {
    return a.subject_id == b.subject_id && a.eye == b.eye ? PairLabel::genuine : PairLabel::impostor;
}

// ---- serialization -----------------------------------------------------------

namespace {

json polygon_json(const Polygon& poly) {
    json out = json::array();
    for (const auto& p : poly) {
        out.push_back({p.x, p.y});
    }
    return out;
}

Polygon polygon_from(const json& j) {
    if (!j.is_array()) {
        throw Error(ErrorKind::invalid_argument, "polygon must be an array of [x, y] pairs");
    }
    Polygon poly;
    for (const auto& v : j) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw Error(ErrorKind::invalid_argument, "polygon vertices must be [x, y] number pairs");
        }
        poly.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return poly;
}

json side_json(const PairSide& s) {
    return {{"image_id", s.image_id}, {"subject_id", s.subject_id}, {"eye", to_string(s.eye)},
            {"pmi_hours", s.pmi_hours}, {"image", s.image}, {"mask", s.mask}, {"detections", s.detections}};
}

PairSide side_from(const json& j) {
    PairSide s;
    s.image_id = j.at("image_id").get<std::string>();
    s.subject_id = j.at("subject_id").get<std::string>();
    s.eye = parse_eye(j.at("eye").get<std::string>());
    s.pmi_hours = j.value("pmi_hours", 0.0);
    s.image = j.at("image").get<std::string>();
    s.mask = j.at("mask").get<std::string>();
    s.detections = j.at("detections").get<std::string>();
    return s;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

json to_json(const PairEntry& p) {
    return {{"pair_id", p.pair_id}, {"a", side_json(p.a)}, {"b", side_json(p.b)}, {"label", to_string(p.label())}};
}

PairEntry pair_from_json(const json& j) {
    try {
        PairEntry p;
        p.pair_id = j.at("pair_id").get<std::string>();
        p.a = side_from(j.at("a"));
        p.b = side_from(j.at("b"));
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_argument, std::string("pair registration: ") + e.what());
    }
}

json to_json(const Annotation& a) {
    return {{"id", a.id},
            {"role", a.role == AnnotationRole::matching ? "matching" : "nonmatching"},
            {"polygon_a", a.polygon_a ? polygon_json(*a.polygon_a) : json(nullptr)},
            {"polygon_b", a.polygon_b ? polygon_json(*a.polygon_b) : json(nullptr)}};
}

Annotation annotation_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorKind::invalid_argument, "annotation must be an object");
    }
    Annotation a;
    a.id = j.contains("id") && j.at("id").is_string() ? j.at("id").get<std::string>() : "";
    const std::string role = j.contains("role") && j.at("role").is_string() ? j.at("role").get<std::string>() : "";
    if (role == "matching") {
        a.role = AnnotationRole::matching;
    } else if (role == "nonmatching") {
        a.role = AnnotationRole::nonmatching;
    } else {
        throw Error(ErrorKind::invalid_argument, "annotation role must be matching or nonmatching");
    }
    if (j.contains("polygon_a") && !j.at("polygon_a").is_null()) {
        a.polygon_a = polygon_from(j.at("polygon_a"));
    }
    if (j.contains("polygon_b") && !j.at("polygon_b").is_null()) {
        a.polygon_b = polygon_from(j.at("polygon_b"));
    }
    return a;
}

json to_json(const TrialRecord& t) {
    json anns = json::array();
    for (const auto& a : t.annotations) {
        anns.push_back(to_json(a));
    }
    return {{"trial_id", t.trial_id},
            {"step", to_string(t.step)},
            {"pair_id", t.pair_id},
            {"annotator_id", t.annotator_id},
            {"open", t.open},
            {"decision", t.decision ? json(to_string(*t.decision)) : json(nullptr)},
            {"annotations", std::move(anns)},
            {"prior_trial", optional_json(t.prior_trial)},
            {"shown_prior_annotations", t.shown_prior_annotations},
            {"verified_by", optional_json(t.verified_by)},
            {"created_at", t.created_at},
            {"submitted_at", t.submitted_at}};
}

TrialRecord trial_from_json(const json& j) {
    TrialRecord t;
    t.trial_id = j.at("trial_id").get<std::string>();
    t.step = parse_trial_step(j.at("step").get<std::string>());
    t.pair_id = j.at("pair_id").get<std::string>();
    t.annotator_id = j.at("annotator_id").get<std::string>();
    t.open = j.at("open").get<bool>();
    if (!j.at("decision").is_null()) {
        t.decision = parse_decision(j.at("decision").get<std::string>());
    }
    for (const auto& a : j.at("annotations")) {
        t.annotations.push_back(annotation_from_json(a));
    }
    if (!j.at("prior_trial").is_null()) {
        t.prior_trial = j.at("prior_trial").get<std::string>();
    }
    t.shown_prior_annotations = j.at("shown_prior_annotations").get<std::vector<std::string>>();
    if (!j.at("verified_by").is_null()) {
        t.verified_by = j.at("verified_by").get<std::string>();
    }
    t.created_at = j.at("created_at").get<std::string>();
    t.submitted_at = j.at("submitted_at").get<std::string>();
    return t;
}

json to_json(const TrialPlan& p) {
    return {{"annotator_id", p.annotator_id}, {"seed", p.seed},           {"pair_ids", p.pair_ids},
            {"n_genuine", p.n_genuine},       {"n_impostor", p.n_impostor}};
}

TrialPlan plan_from_json(const json& j) {
    return {j.at("annotator_id").get<std::string>(), j.at("seed").get<std::uint64_t>(),
            j.at("pair_ids").get<std::vector<std::string>>(), j.at("n_genuine").get<std::size_t>(),
            j.at("n_impostor").get<std::size_t>()};
}

json to_json(const Review& r) {
    return {{"review_id", r.review_id}, {"pair_id", r.pair_id},       {"annotator_id", r.annotator_id},
            {"agree", r.agree},         {"created_at", r.created_at}};
}

Review review_from_json(const json& j) {
    return {j.at("review_id").get<std::string>(), j.at("pair_id").get<std::string>(),
            j.at("annotator_id").get<std::string>(), j.at("agree").get<bool>(), j.at("created_at").get<std::string>()};
}

// ---- planning ----------------------------------------------------------------

TrialPlan plan_trials(const std::string& annotator_id, const std::vector<PoolPair>& pool, std::uint64_t seed) {
    std::vector<std::string> genuine, impostor;
    for (const auto& p : pool) {
        (p.label == PairLabel::genuine ? genuine : impostor).push_back(p.pair_id);
    }
    if (genuine.size() < kPlanGenuine || impostor.size() < kPlanImpostor) {
        throw Error(ErrorKind::invalid_argument,
                    "pair pool has " + std::to_string(genuine.size()) + " genuine and " +
                        std::to_string(impostor.size()) + " impostor pairs; a plan needs " +
                        std::to_string(kPlanGenuine) + " and " + std::to_string(kPlanImpostor));
    }
    Rng rng(fnv1a(annotator_id) ^ (seed * 0x9e3779b97f4a7c15ULL));
    rng.shuffle(genuine.begin(), genuine.end());
    rng.shuffle(impostor.begin(), impostor.end());
    TrialPlan plan;
    plan.annotator_id = annotator_id;
    plan.seed = seed;
    plan.pair_ids.assign(genuine.begin(), genuine.begin() + kPlanGenuine);
    plan.pair_ids.insert(plan.pair_ids.end(), impostor.begin(), impostor.begin() + kPlanImpostor);
    rng.shuffle(plan.pair_ids.begin(), plan.pair_ids.end());
    plan.n_genuine = kPlanGenuine;
    plan.n_impostor = kPlanImpostor;
    return plan;
}

PoolFilter low_pmi_filter(double max_hours) {
    return [max_hours](const PairEntry& p) { return std::min(p.a.pmi_hours, p.b.pmi_hours) <= max_hours; };
}

void validate_submission(Decision decision, const std::vector<Annotation>& annotations) {
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const auto& a = annotations[i];
        const std::string where = "annotation " + std::to_string(i) + ": ";
        if (a.role == AnnotationRole::matching && !(a.polygon_a && a.polygon_b)) {
            throw Error(ErrorKind::invalid_argument, where + "matching annotations link one polygon on each image");
        }
        if (a.role == AnnotationRole::nonmatching && a.polygon_a.has_value() == a.polygon_b.has_value()) {
            throw Error(ErrorKind::invalid_argument, where + "nonmatching annotations carry exactly one polygon");
        }
        for (const auto* poly : {&a.polygon_a, &a.polygon_b}) {
            if (!poly->has_value()) {
                continue;
            }
            if ((*poly)->size() < 3) {
                throw Error(ErrorKind::invalid_argument, where + "polygons need at least 3 vertices");
            }
            for (const auto& p : **poly) {
                if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                    throw Error(ErrorKind::invalid_argument, where + "polygon vertices must be finite");
                }
            }
        }
    }
    const std::size_t needed = decision == Decision::dont_know ? 1 : kMinAnnotations;
    if (annotations.size() < needed) {
        throw Error(ErrorKind::invalid_argument, std::string("decision ") + to_string(decision) + " needs at least " +
                                                     std::to_string(needed) + " annotations, got " +
                                                     std::to_string(annotations.size()));
    }
}

// ---- service -------------------------------------------------------------------

Service::Service(ServiceConfig config, FilterBank bank)
    : config_(std::move(config)),
      bank_(std::move(bank)),
      config_key_(hex64(config_hash(config_.compare, bank_))),
      log_(config_.data_dir / "records.ndjson") {
    for (const auto& record : log_.read_all()) {
        apply(index_, record);
    }
}

std::string Service::config_key() const { return config_key_; }

std::string Service::now() const { return config_.clock ? config_.clock() : utc_now(); }

void Service::commit(const json& event) {
    // apply the parsed form so the live index is exactly what replay builds
    const std::string line = event.dump();
    log_.append(event);
    apply(index_, json::parse(line));
}

void Service::apply(Index& index, const json& e) {
    const std::string type = e.at("type").get<std::string>();
    if (type == "pair_registered") {
        PairEntry p = pair_from_json(e.at("pair"));
        index.pairs[p.pair_id] = std::move(p);
    } else if (type == "plan_created") {
        TrialPlan p = plan_from_json(e.at("plan"));
        index.plans[p.annotator_id] = std::move(p);
    } else if (type == "trial_opened") {
        TrialRecord t = trial_from_json(e.at("trial"));
        if (t.prior_trial) {
            index.trials.at(*t.prior_trial).verified_by = t.trial_id;
        }
        index.trials[t.trial_id] = std::move(t);
    } else if (type == "decision_submitted") {
        auto& t = index.trials.at(e.at("trial_id").get<std::string>());
        t.decision = parse_decision(e.at("decision").get<std::string>());
        t.annotations.clear();
        for (const auto& a : e.at("annotations")) {
            t.annotations.push_back(annotation_from_json(a));
        }
        t.submitted_at = e.at("submitted_at").get<std::string>();
        t.open = false;
    } else if (type == "comparison_stored") {
        index.comparisons[e.at("pair_id").get<std::string>()][e.at("config_key").get<std::string>()] = e.at("result");
    } else if (type == "review_recorded") {
        Review r = review_from_json(e.at("review"));
        index.reviews[r.review_id] = std::move(r);
    } else {
        throw Error(ErrorKind::parse_error, "unknown record type '" + type + "'");
    }
}

json Service::dump_index(const Index& index) {
    json pairs = json::object(), plans = json::object(), trials = json::object(), comparisons = json::object(),
         reviews = json::object();
    for (const auto& [k, v] : index.pairs) pairs[k] = to_json(v);
    for (const auto& [k, v] : index.plans) plans[k] = to_json(v);
    for (const auto& [k, v] : index.trials) trials[k] = to_json(v);
    for (const auto& [k, v] : index.comparisons) comparisons[k] = v;
    for (const auto& [k, v] : index.reviews) reviews[k] = to_json(v);
    return {{"pairs", pairs}, {"plans", plans}, {"trials", trials}, {"comparisons", comparisons}, {"reviews", reviews}};
}

std::string Service::state_dump() const {
    std::shared_lock lock(mutex_);
    return dump_index(index_).dump();
}

PairEntry Service::register_pair(const PairEntry& pair) {
    if (pair.pair_id.empty()) {
        throw Error(ErrorKind::invalid_argument, "pair_id must not be empty");
    }
    for (const auto* side : {&pair.a, &pair.b}) {
        if (side->subject_id.empty() || side->image.empty() || side->mask.empty() || side->detections.empty()) {
            throw Error(ErrorKind::invalid_argument, "pair sides need subject_id, image, mask and detections");
        }
        if (!(side->pmi_hours >= 0.0)) {
            throw Error(ErrorKind::invalid_argument, "pmi_hours must be >= 0");
        }
    }
    std::unique_lock lock(mutex_);
    if (const auto it = index_.pairs.find(pair.pair_id); it != index_.pairs.end()) {
        if (it->second == pair) {
            return it->second;
        }
        throw Error(ErrorKind::conflict, "pair '" + pair.pair_id + "' is already registered with other assets");
    }
    commit({{"type", "pair_registered"}, {"pair", to_json(pair)}});
    return index_.pairs.at(pair.pair_id);
}

std::optional<PairEntry> Service::pair(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.pairs.find(pair_id);
    return it == index_.pairs.end() ? std::nullopt : std::optional(it->second);
}

std::optional<TrialRecord> Service::trial(const std::string& trial_id) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.trials.find(trial_id);
    return it == index_.trials.end() ? std::nullopt : std::optional(it->second);
}

std::optional<TrialPlan> Service::plan(const std::string& annotator_id) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.plans.find(annotator_id);
    return it == index_.plans.end() ? std::nullopt : std::optional(it->second);
}

std::string Service::next_trial_id() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "t%06zu", index_.trials.size() + 1);
    return buf;
}

std::optional<TrialRecord> Service::open_trial_for(const std::string& annotator_id, TrialStep step) const {
    for (const auto& [id, t] : index_.trials) {
        if (t.open && t.annotator_id == annotator_id && t.step == step) {
            return t;
        }
    }
    return std::nullopt;
}

TrialRecord Service::next_trial(const std::string& annotator_id, TrialStep step) {
    if (annotator_id.empty()) {
        throw Error(ErrorKind::invalid_argument, "annotator id must not be empty");
    }
    if (step == TrialStep::verification) {
        return next_verification_trial(annotator_id);
    }
    std::unique_lock lock(mutex_);
    if (auto open = open_trial_for(annotator_id, step)) {
        return *open;
    }
    if (!index_.plans.contains(annotator_id)) {
        std::vector<PoolPair> pool;
        for (const auto& [id, p] : index_.pairs) {
            if (!config_.pool_filter || config_.pool_filter(p)) {
                pool.push_back({id, p.label()});
            }
        }
        commit({{"type", "plan_created"}, {"plan", to_json(plan_trials(annotator_id, pool, config_.seed))}});
    }
    const TrialPlan& plan = index_.plans.at(annotator_id);
    const auto served = static_cast<std::size_t>(
        std::count_if(index_.trials.begin(), index_.trials.end(), [&](const auto& kv) {
            return kv.second.annotator_id == annotator_id && kv.second.step == TrialStep::evaluation;
        }));
    if (served >= plan.pair_ids.size()) {
        throw Error(ErrorKind::not_found, "annotator '" + annotator_id + "' has completed all planned trials");
    }
    TrialRecord t;
    t.trial_id = next_trial_id();
    t.step = TrialStep::evaluation;
    t.pair_id = plan.pair_ids[served];
    t.annotator_id = annotator_id;
    t.created_at = now();
    commit({{"type", "trial_opened"}, {"trial", to_json(t)}});
    return index_.trials.at(t.trial_id);
}

TrialRecord Service::next_verification_trial(const std::string& annotator_id) {
    if (annotator_id.empty()) {
        throw Error(ErrorKind::invalid_argument, "annotator id must not be empty");
    }
    std::unique_lock lock(mutex_);
    if (auto open = open_trial_for(annotator_id, TrialStep::verification)) {
        return *open;
    }
    return open_verification_locked(annotator_id);
}

TrialRecord Service::open_verification_locked(const std::string& annotator_id) {
    const TrialRecord* prior = nullptr;
    for (const auto& [id, t] : index_.trials) {
        if (t.step == TrialStep::evaluation && !t.open && !t.verified_by && t.annotator_id != annotator_id) {
            prior = &t;
            break;
        }
    }
    if (!prior) {
        throw Error(ErrorKind::not_found, "no completed evaluation trial is waiting for verification");
    }
    const std::size_t n = prior->annotations.size();
    Rng rng(fnv1a(annotator_id + "|" + prior->trial_id) ^ (config_.seed * 0x9e3779b97f4a7c15ULL));
    const std::size_t k = 1 + static_cast<std::size_t>(rng.below(n));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    TrialRecord t;
    t.trial_id = next_trial_id();
    t.step = TrialStep::verification;
    t.pair_id = prior->pair_id;
    t.annotator_id = annotator_id;
    t.prior_trial = prior->trial_id;
    for (const std::size_t i : idx) {
        t.shown_prior_annotations.push_back(prior->annotations[i].id);
    }
    t.created_at = now();
    commit({{"type", "trial_opened"}, {"trial", to_json(t)}});
    return index_.trials.at(t.trial_id);
}

json Service::trial_payload(const TrialRecord& trial) const {
    json out = to_json(trial);
    out["images"] = {{"a", "/images/" + trial.pair_id + "/a"}, {"b", "/images/" + trial.pair_id + "/b"}};
    if (trial.prior_trial) {
        std::shared_lock lock(mutex_);
        const auto& prior = index_.trials.at(*trial.prior_trial);
        const std::set<std::string> shown(trial.shown_prior_annotations.begin(), trial.shown_prior_annotations.end());
        json anns = json::array();
        for (const auto& a : prior.annotations) {
            if (shown.contains(a.id)) {
                anns.push_back(to_json(a));
            }
        }
        out["prior"] = {{"trial_id", prior.trial_id},
                        {"decision", prior.decision ? json(to_string(*prior.decision)) : json(nullptr)},
                        {"annotations", std::move(anns)}};
    }
    return out;
}

TrialRecord Service::submit_decision(const std::string& trial_id, Decision decision,
                                     std::vector<Annotation> annotations,
                                     const std::optional<std::string>& annotator_id) {
    validate_submission(decision, annotations);
    std::unique_lock lock(mutex_);
    const auto it = index_.trials.find(trial_id);
    if (it == index_.trials.end()) {
        throw Error(ErrorKind::not_found, "unknown trial '" + trial_id + "'");
    }
    if (!it->second.open) {
        throw Error(ErrorKind::conflict, "trial '" + trial_id + "' is already closed");
    }
    if (annotator_id && *annotator_id != it->second.annotator_id) {
        throw Error(ErrorKind::conflict, "trial '" + trial_id + "' belongs to another annotator");
    }
    json anns = json::array();
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        annotations[i].id = trial_id + "-a" + std::to_string(i + 1);
        anns.push_back(to_json(annotations[i]));
    }
    commit({{"type", "decision_submitted"},
            {"trial_id", trial_id},
            {"decision", to_string(decision)},
            {"annotations", std::move(anns)},
            {"submitted_at", now()}});
    return index_.trials.at(trial_id);
}

SideInput Service::load_side(const PairSide& side) const {
    try {
        return {load_gray_png(side.image), load_mask_png(side.mask), parse_detections(side.detections)};
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) {
            throw Error(ErrorKind::not_found, std::string("missing asset: ") + e.what());
        }
        throw;
    }
}

ComparisonResult Service::run_comparison(const std::string& pair_id) {
    PairEntry entry;
    {
        std::shared_lock lock(mutex_);
        const auto it = index_.pairs.find(pair_id);
        if (it == index_.pairs.end()) {
            throw Error(ErrorKind::not_found, "missing asset: pair '" + pair_id + "' is not registered");
        }
        const auto c = index_.comparisons.find(pair_id);
        if (c != index_.comparisons.end() && c->second.contains(config_key_)) {
            return comparison_from_json(c->second.at(config_key_));
        }
        entry = it->second;
    }
    const ComparisonResult computed = compare(load_side(entry.a), load_side(entry.b), bank_, config_.compare);

    std::unique_lock lock(mutex_);
    auto& stored = index_.comparisons[pair_id];
    if (!stored.contains(config_key_)) {
        commit({{"type", "comparison_stored"},
                {"pair_id", pair_id},
                {"config_key", config_key_},
                {"result", pbm::to_json(computed)}});
    }
    return comparison_from_json(index_.comparisons.at(pair_id).at(config_key_));
}

std::optional<ComparisonResult> Service::result(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    const auto c = index_.comparisons.find(pair_id);
    if (c == index_.comparisons.end() || !c->second.contains(config_key_)) {
        return std::nullopt;
    }
    return comparison_from_json(c->second.at(config_key_));
}

std::size_t Service::stored_comparisons() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [id, by_key] : index_.comparisons) {
        n += by_key.size();
    }
    return n;
}

Review Service::record_review(const std::string& pair_id, const std::string& annotator_id, bool agree) {
    if (annotator_id.empty()) {
        throw Error(ErrorKind::invalid_argument, "annotator id must not be empty");
    }
    std::unique_lock lock(mutex_);
    const auto c = index_.comparisons.find(pair_id);
    if (c == index_.comparisons.end() || !c->second.contains(config_key_)) {
        throw Error(ErrorKind::not_found, "no comparison result for pair '" + pair_id + "'");
    }
    char id[24];
    std::snprintf(id, sizeof id, "r%06zu", index_.reviews.size() + 1);
    const Review r{id, pair_id, annotator_id, agree, now()};
    commit({{"type", "review_recorded"}, {"review", to_json(r)}});
    return r;
}

std::vector<Review> Service::reviews(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    std::vector<Review> out;
    for (const auto& [id, r] : index_.reviews) {
        if (r.pair_id == pair_id) {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<TrialOutcome> Service::outcomes() const {
    std::shared_lock lock(mutex_);
    std::vector<TrialOutcome> out;
    for (const auto& [id, t] : index_.trials) {
        if (t.open || !t.decision) {
            continue;
        }
        TrialOutcome o;
        o.trial_id = id;
        o.step = t.step;
        o.annotator_id = t.annotator_id;
        o.truth = index_.pairs.at(t.pair_id).label();
        o.decision = *t.decision;
        if (t.prior_trial) {
            o.prior_decision = index_.trials.at(*t.prior_trial).decision;
        }
        out.push_back(o);
    }
    return out;
}

HumanAccuracyTable Service::human_stats() const { return human_accuracy_stats(outcomes()); }

DecisionChangeTable Service::change_stats() const { return decision_change_stats(outcomes()); }

json Service::client_config() const {
    return {{"min_annotations", kMinAnnotations},
            {"min_annotations_dont_know", 1},
            {"decisions", {"same_eye", "different_eyes", "dont_know"}},
            {"roles", {"matching", "nonmatching"}},
            {"steps", {"evaluation", "verification"}},
            {"plan", {{"genuine", kPlanGenuine}, {"impostor", kPlanImpostor}}},
            {"comparison", config_to_json(config_.compare, bank_)},
            {"config_key", config_key_}};
}

std::string Service::evidence_svg(const std::string& pair_id) const {
    const auto r = result(pair_id);
    const auto entry = pair(pair_id);
    if (!r || !entry) {
        throw Error(ErrorKind::not_found, "no comparison result for pair '" + pair_id + "'");
    }
    const SideInput a = load_side(entry->a);
    const SideInput b = load_side(entry->b);
    const IrisCrop ca = preprocess(a.image, a.mask, config_.compare.preprocess);
    const IrisCrop cb = preprocess(b.image, b.mask, config_.compare.preprocess);
    return render_comparison(*r, ca.image, cb.image);
}

}  // namespace pbm::service
