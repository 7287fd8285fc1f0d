#include "pbm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "pbm/error.hpp"

namespace pbm {

using nlohmann::json;

const char* to_string(PairLabel l) noexcept { return l == PairLabel::genuine ? "genuine" : "impostor"; }

PairLabel parse_pair_label(const std::string& s) {
    if (s == "genuine") return PairLabel::genuine;
    if (s == "impostor") return PairLabel::impostor;
    throw Error(ErrorKind::parse_error, "label must be genuine or impostor, got '" + s + "'");
}

void validate_scores(const ScoreSet& scores) {
    for (const auto& r : scores) {
        if (!std::isfinite(r.score)) {
            throw Error(ErrorKind::invalid_argument, "pair '" + r.pair_id + "': score is not finite");
        }
        const bool same = r.subject_a == r.subject_b;
        if (same != (r.label == PairLabel::genuine)) {
            throw Error(ErrorKind::invalid_argument,
                        "pair '" + r.pair_id + "': label " + to_string(r.label) + " contradicts subject ids");
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

bool parse_flag(const std::string& s) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false" || s.empty()) return false;
    throw Error(ErrorKind::parse_error, "bad no_evidence flag '" + s + "'");
}

void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
}

}  // namespace

ScoreSet read_scores_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::parse_error, "score file is empty");
    }
    strip_cr(line);
    if (line != "pair_id,subject_a,subject_b,score,label,no_evidence") {
        throw Error(ErrorKind::parse_error, "unexpected score file header '" + line + "'");
    }
    ScoreSet out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) {
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": expected 6 fields");
        }
        ScoreRecord r;
        r.pair_id = cells[0];
        r.subject_a = cells[1];
        r.subject_b = cells[2];
        try {
            std::size_t used = 0;
            r.score = std::stod(cells[3], &used);
            if (used != cells[3].size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": bad score '" + cells[3] + "'");
        }
        r.label = parse_pair_label(cells[4]);
        r.no_evidence = parse_flag(cells[5]);
        out.push_back(std::move(r));
    }
    validate_scores(out);
    return out;
}

ScoreSet read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open score file: " + path.string());
    }
    return read_scores_csv(in);
}

void write_scores_csv(const ScoreSet& scores, std::ostream& out) {
    out << "pair_id,subject_a,subject_b,score,label,no_evidence\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : scores) {
        out << r.pair_id << ',' << r.subject_a << ',' << r.subject_b << ',' << r.score << ',' << to_string(r.label)
            << ',' << (r.no_evidence ? 1 : 0) << '\n';
    }
}

void write_scores_csv(const ScoreSet& scores, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write score file: " + path.string());
    }
    write_scores_csv(scores, out);
}

namespace {

struct Split {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

Split split(const ScoreSet& scores, bool include_no_evidence) {
    Split s;
    for (const auto& r : scores) {
        if (r.no_evidence && !include_no_evidence) {
            continue;
        }
        (r.label == PairLabel::genuine ? s.genuine : s.impostor).push_back(r.score);
    }
    return s;
}

double mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) {
        sum += x;
    }
    return sum / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double m) {
    double acc = 0.0;
    for (const double x : v) {
        acc += (x - m) * (x - m);
    }
    return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

RocCurve roc(const ScoreSet& scores, bool include_no_evidence) {
    Split s = split(scores, include_no_evidence);
    if (s.genuine.empty() || s.impostor.empty()) {
        throw Error(ErrorKind::invalid_argument, "ROC needs at least one genuine and one impostor score");
    }
    std::sort(s.genuine.begin(), s.genuine.end());
    std::sort(s.impostor.begin(), s.impostor.end());
    std::vector<double> all = s.genuine;
    all.insert(all.end(), s.impostor.begin(), s.impostor.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<double> thresholds;
    thresholds.reserve(all.size() + 1);
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        thresholds.push_back(all[i] + (all[i + 1] - all[i]) / 2.0);
    }
    thresholds.push_back(std::numeric_limits<double>::infinity());

    RocCurve c;
    c.n_genuine = s.genuine.size();
    c.n_impostor = s.impostor.size();
    const auto ng = static_cast<double>(c.n_genuine);
    const auto ni = static_cast<double>(c.n_impostor);
    for (const double t : thresholds) {
        const auto accepted_impostors = std::lower_bound(s.impostor.begin(), s.impostor.end(), t) - s.impostor.begin();
        const auto rejected_genuine = s.genuine.end() - std::upper_bound(s.genuine.begin(), s.genuine.end(), t);
        c.points.push_back({t, static_cast<double>(accepted_impostors) / ni, static_cast<double>(rejected_genuine) / ng});
    }
    return c;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        const auto& q = curve.points[i + 1];
        area += (q.far - p.far) * ((1.0 - p.frr) + (1.0 - q.frr)) / 2.0;
    }
    return area;
}

double eer(const RocCurve& curve) {
    const auto& pts = curve.points;
    if (pts.empty()) {
        throw Error(ErrorKind::invalid_argument, "EER of an empty curve");
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = pts[i].far - pts[i].frr;
        if (d == 0.0) {
            return pts[i].far;
        }
        if (d > 0.0) {
            if (i == 0) {
                return pts[0].far;
            }
            const auto& p = pts[i - 1];
            const double dp = p.far - p.frr;
            const double t = -dp / (d - dp);
            return p.far + t * (pts[i].far - p.far);
        }
    }
    return pts.back().far;
}

double dprime(const ScoreSet& scores, bool include_no_evidence) {
    const Split s = split(scores, include_no_evidence);
    if (s.genuine.size() < 2 || s.impostor.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "d' needs at least two scores per class");
    }
    const double mg = mean(s.genuine);
    const double mi = mean(s.impostor);
    const double diff = std::abs(mi - mg);
    if (diff == 0.0) {
        return 0.0;
    }
    const double pooled = std::sqrt((sample_variance(s.genuine, mg) + sample_variance(s.impostor, mi)) / 2.0);
    return pooled > 0.0 ? diff / pooled : std::numeric_limits<double>::infinity();
}

Metrics compute_metrics(const ScoreSet& scores, bool include_no_evidence) {
    Metrics m;
    m.no_evidence_included = include_no_evidence;
    for (const auto& r : scores) {
        m.n_no_evidence += r.no_evidence ? 1 : 0;
    }
    const RocCurve c = roc(scores, include_no_evidence);
    m.n_genuine = c.n_genuine;
    m.n_impostor = c.n_impostor;
    m.auc = auc(c);
    m.eer = eer(c);
    m.dprime = dprime(scores, include_no_evidence);
    return m;
}

json to_json(const Metrics& m) {
    return {{"n_genuine", m.n_genuine}, {"n_impostor", m.n_impostor}, {"n_no_evidence", m.n_no_evidence},
            {"no_evidence_included", m.no_evidence_included}, {"auc", m.auc}, {"eer", m.eer},
            {"dprime", std::isfinite(m.dprime) ? json(m.dprime) : json("inf")}};
}

void write_roc_csv(const RocCurve& curve, std::ostream& out) {
    out << "threshold,far,frr\n" << std::setprecision(12);
    for (const auto& p : curve.points) {
        out << p.threshold << ',' << p.far << ',' << p.frr << '\n';
    }
}

std::string roc_svg(const RocCurve& curve, int size) {
    std::ostringstream svg;
    svg << std::fixed << std::setprecision(2);
    const int pad = 40;
    const double span = size - 2 * pad;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    svg << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << span << "\" height=\"" << span
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"#0a2a8a\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        svg << (i ? " " : "") << pad + p.far * span << ',' << pad + p.frr * span;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << size / 2 << "\" y=\"" << size - 10 << "\" text-anchor=\"middle\" font-size=\"12\">FAR</text>\n";
    svg << "<text x=\"12\" y=\"" << size / 2 << "\" font-size=\"12\">FRR</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

// ---- human trials --------------------------------------------------------

const char* to_string(Decision d) noexcept {
    switch (d) {
        case Decision::same_eye: return "same_eye";
        case Decision::different_eyes: return "different_eyes";
        case Decision::dont_know: return "dont_know";
    }
    return "dont_know";
}

const char* to_string(TrialStep s) noexcept { return s == TrialStep::evaluation ? "evaluation" : "verification"; }

Decision parse_decision(const std::string& s) {
    if (s == "same_eye") return Decision::same_eye;
    if (s == "different_eyes") return Decision::different_eyes;
    if (s == "dont_know") return Decision::dont_know;
    throw Error(ErrorKind::invalid_argument, "decision must be same_eye, different_eyes or dont_know");
}

TrialStep parse_trial_step(const std::string& s) {
    if (s == "evaluation") return TrialStep::evaluation;
    if (s == "verification") return TrialStep::verification;
    throw Error(ErrorKind::invalid_argument, "step must be evaluation or verification");
}

bool is_correct(Decision d, PairLabel truth) noexcept {
    return (d == Decision::same_eye && truth == PairLabel::genuine) ||
           (d == Decision::different_eyes && truth == PairLabel::impostor);
}

AccuracyColumn accuracy_column(const std::vector<TrialOutcome>& trials) {
    AccuracyColumn col;
    std::size_t correct = 0, n_gen = 0, gen_ok = 0, n_imp = 0, imp_ok = 0, unsure = 0;
    std::set<std::string> annotators;
    for (const auto& t : trials) {
        const bool ok = is_correct(t.decision, t.truth);
        correct += ok;
        unsure += t.decision == Decision::dont_know;
        if (t.truth == PairLabel::genuine) {
            ++n_gen;
            gen_ok += ok;
        } else {
            ++n_imp;
            imp_ok += ok;
        }
        annotators.insert(t.annotator_id);
    }
    auto frac = [](std::size_t num, std::size_t den) {
        return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    col.n_trials = trials.size();
    col.overall = frac(correct, trials.size());
    col.genuine = frac(gen_ok, n_gen);
    col.impostor = frac(imp_ok, n_imp);
    col.inconclusive = frac(unsure, trials.size());
    col.n_annotators = annotators.size();
    return col;
}

HumanAccuracyTable human_accuracy_stats(const std::vector<TrialOutcome>& trials) {
    std::vector<TrialOutcome> eval_trials, verify_trials;
    for (const auto& t : trials) {
        (t.step == TrialStep::evaluation ? eval_trials : verify_trials).push_back(t);
    }
    return {accuracy_column(eval_trials), accuracy_column(verify_trials)};
}

std::string format_table(const HumanAccuracyTable& t) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    auto row = [&](const char* name, double a, double b) {
        out << std::left << std::setw(22) << name << std::right << std::setw(9) << a * 100.0 << '%' << std::setw(9)
            << b * 100.0 << "%\n";
    };
    out << std::left << std::setw(22) << "" << std::right << std::setw(10) << "Step 1" << std::setw(10) << "Step 2"
        << '\n';
    out << std::left << std::setw(22) << "" << std::right << std::setw(10) << "(eval)" << std::setw(10) << "(verif)"
        << '\n';
    row("Overall", t.evaluation.overall, t.verification.overall);
    row("Genuine pairs", t.evaluation.genuine, t.verification.genuine);
    row("Impostor pairs", t.evaluation.impostor, t.verification.impostor);
    row("Inconclusive", t.evaluation.inconclusive, t.verification.inconclusive);
    out << std::left << std::setw(22) << "Number of annotators" << std::right << std::setw(10)
        << t.evaluation.n_annotators << std::setw(10) << t.verification.n_annotators << '\n';
    return out.str();
}

json to_json(const HumanAccuracyTable& t) {
    auto col = [](const AccuracyColumn& c) {
        return json{{"n_trials", c.n_trials},       {"overall", c.overall},
                    {"genuine", c.genuine},         {"impostor", c.impostor},
                    {"inconclusive", c.inconclusive}, {"n_annotators", c.n_annotators}};
    };
    return {{"evaluation", col(t.evaluation)}, {"verification", col(t.verification)}};
}

namespace {

const char* category(Decision d) {
    switch (d) {
        case Decision::same_eye: return "genuine";
        case Decision::different_eyes: return "impostor";
        case Decision::dont_know: return "unsure";
    }
    return "unsure";
}

}  // namespace

const DecisionChangeTable::Cell& DecisionChangeTable::at(const std::string& key) const {
    static const Cell empty{};
    const auto it = transitions.find(key);
    return it == transitions.end() ? empty : it->second;
}

DecisionChangeTable decision_change_stats(const std::vector<TrialOutcome>& trials) {
    DecisionChangeTable t;
    for (const auto& tr : trials) {
        if (tr.step != TrialStep::verification || !tr.prior_decision) {
            continue;
        }
        ++t.n_verification;
        if (*tr.prior_decision == tr.decision) {
            ++t.n_unchanged;
            continue;
        }
        auto& cell = t.transitions[std::string(category(*tr.prior_decision)) + "->" + category(tr.decision)];
        const bool was = is_correct(*tr.prior_decision, tr.truth);
        const bool now = is_correct(tr.decision, tr.truth);
        if (!was && now) {
            ++cell.incorrect_to_correct;
        } else if (was && !now) {
            ++cell.correct_to_incorrect;
        } else if (was) {
            ++cell.correct_to_correct;
        } else {
            ++cell.incorrect_to_incorrect;
        }
    }
    return t;
}

std::string format_table(const DecisionChangeTable& t) {
    std::ostringstream out;
    const std::pair<const char*, const char*> rows[] = {
        {"Genuine to Impostor", "genuine->impostor"}, {"Impostor to Genuine", "impostor->genuine"},
        {"Unsure to Genuine", "unsure->genuine"},     {"Unsure to Impostor", "unsure->impostor"},
        {"Genuine to Unsure", "genuine->unsure"},     {"Impostor to Unsure", "impostor->unsure"},
    };
    out << std::left << std::setw(22) << "" << std::right << std::setw(22) << "Incorrect to Correct" << std::setw(22)
        << "Correct to Incorrect" << '\n';
    for (const auto& [name, key] : rows) {
        const auto& c = t.at(key);
        out << std::left << std::setw(22) << name << std::right << std::setw(22) << c.incorrect_to_correct
            << std::setw(22) << c.correct_to_incorrect << '\n';
    }
    return out.str();
}

json to_json(const DecisionChangeTable& t) {
    json cells = json::object();
    for (const auto& [key, c] : t.transitions) {
        cells[key] = {{"incorrect_to_correct", c.incorrect_to_correct},
                      {"correct_to_incorrect", c.correct_to_incorrect},
                      {"incorrect_to_incorrect", c.incorrect_to_incorrect},
                      {"correct_to_correct", c.correct_to_correct}};
    }
    return {{"n_verification", t.n_verification}, {"n_unchanged", t.n_unchanged}, {"transitions", cells}};
}

// ---- pairing protocols -----------------------------------------------------

std::vector<SamplePair> pairs_all_vs_all(const std::vector<Sample>& samples) {
    std::vector<SamplePair> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            out.push_back({i, j, samples[i].subject_id == samples[j].subject_id ? PairLabel::genuine
                                                                                : PairLabel::impostor});
        }
    }
    return out;
}

std::vector<SamplePair> pairs_cross_session(const std::vector<Sample>& samples) {
    std::vector<SamplePair> out;
    for (const auto& p : pairs_all_vs_all(samples)) {
        if (samples[p.a].session != samples[p.b].session) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace pbm
