// pbm: command-line front end for patch-based iris matching.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pbm/bsif.hpp"
#include "pbm/detection.hpp"
#include "pbm/error.hpp"
#include "pbm/eval.hpp"
#include "pbm/imaging.hpp"
#include "pbm/matching.hpp"
#include "pbm/report.hpp"
#include "pbm/service/http.hpp"
#include "pbm/service/service.hpp"
#include "pbm/synthetic.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw pbm::Error(pbm::ErrorKind::io, "cannot write " + path);
    }
    out << text;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw pbm::Error(pbm::ErrorKind::io, "cannot open " + path);
    }
    return json::parse(in);
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

struct ConfigFlags {
    double angle_tol = 20.0;
    std::size_t max_pairs = 5;
    double overlap_frac = 0.5;
    double clip_limit = 2.0;
    std::vector<int> tile_grid{8, 8};
    int crop_side = 256;
    std::string det_frame = "crop";
    std::size_t top_n = 0;

    void add_to(CLI::App* app) {
        app->add_option("--angle-tol", angle_tol, "Angular gate in degrees")->capture_default_str();
        app->add_option("--max-pairs", max_pairs, "Pairs averaged into the score")->capture_default_str();
        app->add_option("--overlap-frac", overlap_frac, "Minimum overlap as a fraction of the smaller patch")
            ->capture_default_str();
        app->add_option("--clip-limit", clip_limit, "CLAHE clip limit")->capture_default_str();
        app->add_option("--tile-grid", tile_grid, "CLAHE tile grid (cols rows)")->expected(2)->capture_default_str();
        app->add_option("--crop-side", crop_side, "Side of the square iris crop")->capture_default_str();
        app->add_option("--det-frame", det_frame, "Frame of detection polygons")
            ->check(CLI::IsMember({"crop", "source"}))
            ->capture_default_str();
        app->add_option("--top-n-detections", top_n, "Keep only the n most confident detections (0 = all)");
    }

    pbm::CompareConfig build() const {
        pbm::CompareConfig c;
        c.match.angle_tol = angle_tol;
        c.match.max_pairs = max_pairs;
        c.match.overlap_frac = overlap_frac;
        c.preprocess.crop_side = crop_side;
        c.preprocess.clahe = {tile_grid.at(0), tile_grid.at(1), clip_limit};
        c.frame = det_frame == "source" ? pbm::DetectionFrame::source : pbm::DetectionFrame::crop;
        if (top_n > 0) {
            c.top_n_detections = top_n;
        }
        return c;
    }
};

pbm::FilterBank bank_or_placeholder(const std::string& path) {
    if (path.empty()) {
        std::cerr << "warning: no --filter-bank given, using the seeded placeholder bank (5 x 17x17)\n";
        return pbm::make_placeholder_bank();
    }
    return pbm::load_filter_bank(path);
}

std::map<std::string, std::string> read_manifest_row(const std::vector<std::string>& header,
                                                     const std::string& line) {
    std::map<std::string, std::string> row;
    std::stringstream ss(line);
    std::string cell;
    for (const auto& h : header) {
        std::getline(ss, cell, ',');
        row[h] = cell;
    }
    return row;
}

pbm::service::Service* g_service_for_signal = nullptr;
pbm::service::HttpServer* g_server_for_signal = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-based interpretable iris matching"};
    app.require_subcommand(1);

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare two iris images through their detected patches");
    std::string img_a, mask_a, det_a, img_b, mask_b, det_b, bank_path, out_json, out_svg;
    ConfigFlags cmp_flags;
    cmp->add_option("--image-a", img_a)->required()->check(CLI::ExistingFile);
    cmp->add_option("--mask-a", mask_a)->required()->check(CLI::ExistingFile);
    cmp->add_option("--det-a", det_a)->required()->check(CLI::ExistingFile);
    cmp->add_option("--image-b", img_b)->required()->check(CLI::ExistingFile);
    cmp->add_option("--mask-b", mask_b)->required()->check(CLI::ExistingFile);
    cmp->add_option("--det-b", det_b)->required()->check(CLI::ExistingFile);
    cmp->add_option("--filter-bank", bank_path, "BSIF filter-bank file")->check(CLI::ExistingFile);
    cmp->add_option("--out", out_json, "Write the comparison result JSON here");
    cmp->add_option("--svg", out_svg, "Write the match-evidence SVG here");
    cmp_flags.add_to(cmp);

    // eval
    auto* ev = app.add_subcommand("eval", "ROC, AUC, EER and d' for a score file");
    std::string scores_path, ev_json, roc_csv, roc_svg_path;
    bool exclude_no_evidence = false;
    ev->add_option("--scores", scores_path)->required()->check(CLI::ExistingFile);
    ev->add_flag("--exclude-no-evidence", exclude_no_evidence, "Drop no-evidence comparisons");
    ev->add_option("--json", ev_json, "Write metrics JSON here");
    ev->add_option("--roc-csv", roc_csv, "Write the ROC points as CSV");
    ev->add_option("--roc-svg", roc_svg_path, "Write the ROC polyline as SVG");

    // render
    auto* rd = app.add_subcommand("render", "Render match evidence for a stored result");
    std::string rd_result, rd_img_a, rd_img_b, rd_mask_a, rd_mask_b, rd_out;
    rd->add_option("--result", rd_result)->required()->check(CLI::ExistingFile);
    rd->add_option("--image-a", rd_img_a)->required()->check(CLI::ExistingFile);
    rd->add_option("--image-b", rd_img_b)->required()->check(CLI::ExistingFile);
    rd->add_option("--mask-a", rd_mask_a)->required()->check(CLI::ExistingFile);
    rd->add_option("--mask-b", rd_mask_b)->required()->check(CLI::ExistingFile);
    rd->add_option("--out", rd_out)->required();

    // detect
    auto* dt = app.add_subcommand("detect", "Texture-variance fallback detector (test stand-in)");
    std::string dt_img, dt_mask, dt_out, dt_image_id, dt_subject = "unknown", dt_eye = "L";
    double dt_pmi = 0.0;
    int dt_crop = 256;
    pbm::FallbackParams fb;
    dt->add_option("--image", dt_img)->required()->check(CLI::ExistingFile);
    dt->add_option("--mask", dt_mask)->required()->check(CLI::ExistingFile);
    dt->add_option("--out", dt_out)->required();
    dt->add_option("-k", fb.k, "Number of detections")->capture_default_str();
    dt->add_option("--window", fb.window, "Window side")->capture_default_str();
    dt->add_option("--crop-side", dt_crop)->capture_default_str();
    dt->add_option("--image-id", dt_image_id);
    dt->add_option("--subject-id", dt_subject);
    dt->add_option("--eye", dt_eye)->check(CLI::IsMember({"L", "R"}));
    dt->add_option("--pmi-hours", dt_pmi);

    // validate-detections
    auto* vd = app.add_subcommand("validate-detections", "Check a detection file against the interchange schema");
    std::string vd_path;
    vd->add_option("path", vd_path)->required()->check(CLI::ExistingFile);

    // make-bank
    auto* mb = app.add_subcommand("make-bank", "Write a seeded placeholder filter bank");
    std::string mb_out;
    int mb_n = 5, mb_size = 17;
    std::uint64_t mb_seed = 0x5eed;
    mb->add_option("--out", mb_out)->required();
    mb->add_option("--filters", mb_n)->capture_default_str();
    mb->add_option("--size", mb_size)->capture_default_str();
    mb->add_option("--seed", mb_seed)->capture_default_str();

    // synth
    auto* sy = app.add_subcommand("synth", "Generate a synthetic iris image set with a manifest");
    std::string sy_dir;
    int sy_ids = 4, sy_sessions = 2;
    double sy_noise = 6.0;
    sy->add_option("--out-dir", sy_dir)->required();
    sy->add_option("--identities", sy_ids)->capture_default_str();
    sy->add_option("--sessions", sy_sessions)->capture_default_str();
    sy->add_option("--noise", sy_noise)->capture_default_str();

    // batch
    auto* bt = app.add_subcommand("batch", "Score every pair of a manifest into a score CSV");
    std::string bt_manifest, bt_bank, bt_out, bt_protocol = "all";
    ConfigFlags bt_flags;
    bt->add_option("--manifest", bt_manifest, "CSV: image_id,subject_id,session,image,mask,detections")
        ->required()
        ->check(CLI::ExistingFile);
    bt->add_option("--filter-bank", bt_bank)->check(CLI::ExistingFile);
    bt->add_option("--out", bt_out)->required();
    bt->add_option("--protocol", bt_protocol)->check(CLI::IsMember({"all", "cross-session"}))->capture_default_str();
    bt_flags.add_to(bt);

    // serve
    auto* sv = app.add_subcommand("serve", "Run the trial and comparison HTTP service");
    std::string sv_host = env_or("PBM_HOST", "127.0.0.1");
    int sv_port = std::stoi(env_or("PBM_PORT", "8080"));
    std::string sv_data = env_or("PBM_DATA_DIR", "pbm-data");
    std::uint64_t sv_seed = std::stoull(env_or("PBM_SEED", "1"));
    std::string sv_bank = env_or("PBM_FILTER_BANK", "");
    std::string sv_static;
    double sv_low_pmi = pbm::service::kDefaultLowPmiHours;
    bool sv_no_pmi_filter = false;
    ConfigFlags sv_flags;
    sv->add_option("--host", sv_host)->capture_default_str();
    sv->add_option("--port", sv_port)->capture_default_str();
    sv->add_option("--data-dir", sv_data)->capture_default_str();
    sv->add_option("--seed", sv_seed)->capture_default_str();
    sv->add_option("--filter-bank", sv_bank);
    sv->add_option("--static-dir", sv_static, "Serve a workbench bundle from this directory");
    sv->add_option("--low-pmi-hours", sv_low_pmi, "Trial pool keeps pairs with one eye at or below this PMI")
        ->capture_default_str();
    sv->add_flag("--no-pmi-filter", sv_no_pmi_filter, "Put every registered pair in the trial pool");
    sv_flags.add_to(sv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmp) {
            const auto bank = bank_or_placeholder(bank_path);
            const auto config = cmp_flags.build();
            const pbm::SideInput a{pbm::load_gray_png(img_a), pbm::load_mask_png(mask_a), pbm::parse_detections(det_a)};
            const pbm::SideInput b{pbm::load_gray_png(img_b), pbm::load_mask_png(mask_b), pbm::parse_detections(det_b)};
            const auto result = pbm::compare(a, b, bank, config);
            std::cout << "score " << result.score << (result.no_evidence ? " (no evidence)" : "") << "  pairs "
                      << result.pairs.size() << "  candidates " << result.n_candidates << '\n';
            for (const auto& p : result.pairs) {
                std::cout << "  " << p.id_a << " <-> " << p.id_b << "  distance " << p.distance << "  offset ("
                          << p.offset.dx << ", " << p.offset.dy << ")  overlap " << p.overlap_area << '\n';
            }
            if (!out_json.empty()) {
                write_text(out_json, pbm::to_json(result).dump(2) + "\n");
            }
            if (!out_svg.empty()) {
                const auto ca = pbm::preprocess(a.image, a.mask, config.preprocess);
                const auto cb = pbm::preprocess(b.image, b.mask, config.preprocess);
                write_text(out_svg, pbm::render_comparison(result, ca.image, cb.image));
            }
        } else if (*ev) {
            const auto scores = pbm::read_scores_csv(std::filesystem::path(scores_path));
            const auto curve = pbm::roc(scores, !exclude_no_evidence);
            const auto m = pbm::compute_metrics(scores, !exclude_no_evidence);
            std::cout << "genuine " << m.n_genuine << "  impostor " << m.n_impostor << "  no-evidence "
                      << m.n_no_evidence << (exclude_no_evidence ? " (excluded)" : " (included at sentinel)") << '\n'
                      << "AUC " << m.auc << "\nEER " << m.eer << "\nd' " << m.dprime << '\n';
            if (!ev_json.empty()) {
                write_text(ev_json, pbm::to_json(m).dump(2) + "\n");
            }
            if (!roc_csv.empty()) {
                std::ostringstream out;
                pbm::write_roc_csv(curve, out);
                write_text(roc_csv, out.str());
            }
            if (!roc_svg_path.empty()) {
                write_text(roc_svg_path, pbm::roc_svg(curve));
            }
        } else if (*rd) {
            const auto result = pbm::comparison_from_json(read_json(rd_result));
            auto crop_for = [&](const std::string& path, const std::string& mask_path, const pbm::SideEvidence& side) {
                pbm::ClaheParams clahe;
                if (result.params.contains("clahe")) {
                    const auto& c = result.params.at("clahe");
                    clahe = {c.at("tile_grid").at(0).get<int>(), c.at("tile_grid").at(1).get<int>(),
                             c.at("clip_limit").get<double>()};
                }
                const auto img = pbm::apply_mask(pbm::load_gray_png(path), pbm::load_mask_png(mask_path));
                return pbm::clahe(pbm::crop_window(img, side.crop_offset, side.crop_side, side.crop_side), clahe);
            };
            write_text(rd_out, pbm::render_comparison(result, crop_for(rd_img_a, rd_mask_a, result.side_a),
                                                      crop_for(rd_img_b, rd_mask_b, result.side_b)));
        } else if (*dt) {
            const auto img = pbm::load_gray_png(dt_img);
            const auto mask = pbm::load_mask_png(dt_mask);
            const auto crop = pbm::preprocess(img, mask, {dt_crop, {}});
            auto set = pbm::fallback_detect(crop.image, crop.mask, fb);
            set.image_id = dt_image_id.empty() ? std::filesystem::path(dt_img).stem().string() : dt_image_id;
            set.subject_id = dt_subject;
            set.eye = pbm::parse_eye(dt_eye);
            set.pmi_hours = dt_pmi;
            pbm::write_detections(set, dt_out);
            std::cout << set.detections.size() << " detections written to " << dt_out << '\n';
        } else if (*vd) {
            const auto errors = pbm::validate_detection_json(read_json(vd_path));
            if (errors.empty()) {
                std::cout << vd_path << ": valid\n";
            } else {
                for (const auto& e : errors) {
                    std::cout << vd_path << ": " << e << '\n';
                }
                return 1;
            }
        } else if (*mb) {
            pbm::save_filter_bank(pbm::make_placeholder_bank(mb_n, mb_size, mb_seed), mb_out);
        } else if (*sy) {
            namespace fs = std::filesystem;
            fs::create_directories(sy_dir);
            const pbm::synthetic::IrisGeometry geom;
            const auto mask = pbm::synthetic::annulus_mask(geom);
            pbm::save_png(mask, fs::path(sy_dir) / "mask.png");
            std::ofstream manifest(fs::path(sy_dir) / "manifest.csv");
            manifest << "image_id,subject_id,session,image,mask,detections\n";
            for (int id = 0; id < sy_ids; ++id) {
                const auto base = pbm::synthetic::iris_texture(static_cast<std::uint64_t>(id), geom);
                for (int s = 0; s < sy_sessions; ++s) {
                    const std::string image_id = "s" + std::to_string(id) + "_" + std::to_string(s);
                    const auto img = pbm::synthetic::add_noise(base, sy_noise, static_cast<std::uint64_t>(id * 1000 + s));
                    const auto img_path = fs::path(sy_dir) / (image_id + ".png");
                    pbm::save_png(img, img_path);
                    const auto crop = pbm::preprocess(img, mask);
                    auto set = pbm::fallback_detect(crop.image, crop.mask);
                    set.image_id = image_id;
                    set.subject_id = "s" + std::to_string(id);
                    const auto det_path = fs::path(sy_dir) / (image_id + ".json");
                    pbm::write_detections(set, det_path);
                    manifest << image_id << ",s" << id << "_L," << s << ',' << fs::absolute(img_path).string() << ','
                             << fs::absolute(fs::path(sy_dir) / "mask.png").string() << ','
                             << fs::absolute(det_path).string() << '\n';
                }
            }
            std::cout << "wrote " << sy_ids * sy_sessions << " images to " << sy_dir << '\n';
        } else if (*bt) {
            const auto bank = bank_or_placeholder(bt_bank);
            const auto config = bt_flags.build();
            std::ifstream in(bt_manifest);
            std::string line;
            std::getline(in, line);
            std::vector<std::string> header;
            {
                std::stringstream ss(line);
                std::string h;
                while (std::getline(ss, h, ',')) header.push_back(h);
            }
            std::vector<pbm::Sample> samples;
            std::vector<pbm::PreparedSide> prepared;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                auto row = read_manifest_row(header, line);
                samples.push_back({row.at("image_id"), row.at("subject_id"), row.at("session")});
                const pbm::SideInput side{pbm::load_gray_png(row.at("image")), pbm::load_mask_png(row.at("mask")),
                                          pbm::parse_detections(row.at("detections"))};
                prepared.push_back(pbm::prepare_side(side, bank, config));
            }
            const auto pairs =
                bt_protocol == "all" ? pbm::pairs_all_vs_all(samples) : pbm::pairs_cross_session(samples);
            pbm::ScoreSet scores;
            for (const auto& p : pairs) {
                const auto r = pbm::match_prepared(prepared[p.a], prepared[p.b], config.match);
                scores.push_back({samples[p.a].image_id + "~" + samples[p.b].image_id, samples[p.a].subject_id,
                                  samples[p.b].subject_id, r.score, p.label, r.no_evidence});
            }
            pbm::write_scores_csv(scores, std::filesystem::path(bt_out));
            std::cout << scores.size() << " comparisons (" << bt_protocol << " protocol) written to " << bt_out << '\n';
        } else if (*sv) {
            pbm::service::ServiceConfig config;
            config.data_dir = sv_data;
            config.seed = sv_seed;
            config.compare = sv_flags.build();
            if (!sv_no_pmi_filter) {
                config.pool_filter = pbm::service::low_pmi_filter(sv_low_pmi);
            }
            pbm::service::Service service(std::move(config), bank_or_placeholder(sv_bank));
            pbm::service::HttpServer server(service, {sv_host, sv_port, sv_static});
            const int port = server.bind();
            g_service_for_signal = &service;
            g_server_for_signal = &server;
            std::signal(SIGINT, [](int) {
                if (g_server_for_signal) g_server_for_signal->stop();
            });
            std::cout << "listening on http://" << sv_host << ':' << port << "  (log " << service.log_path().string()
                      << ")\n"
                      << std::flush;
            server.listen();
        }
    } catch (const pbm::Error& e) {
        std::cerr << "error (" << pbm::to_string(e.kind()) << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
