// Command-line front end: RQA feature extraction, dimensionality reduction,
// speaker-independent evaluation, and 2-D scatter plots.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ser/dataio.hpp"
#include "ser/errors.hpp"
#include "ser/eval.hpp"
#include "ser/rqa.hpp"
#include "ser/svg.hpp"

namespace {

struct ManifestRow {
    std::string path, id, speaker, session, label;
};

std::vector<ManifestRow> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ser::IoError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ser::ParseError("empty manifest: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,id,speaker,session,label")
        throw ser::ParseError(path + ": manifest header must be path,id,speaker,session,label");
    std::vector<ManifestRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != 5)
            throw ser::ParseError(path + ": line " + std::to_string(lineno) +
                                  " must have 5 fields");
        rows.push_back({fields[0], fields[1], fields[2], fields[3], fields[4]});
    }
    return rows;
}

int cmd_extract(const std::string& manifest_path, const ser::RqaConfig& cfg,
                const std::string& out_path) {
    const auto manifest = load_manifest(manifest_path);
    ser::FeatureTable table;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& row = manifest[i];
        std::cerr << "[" << (i + 1) << "/" << manifest.size() << "] " << row.path << "\n";
        ser::AudioClip clip;
        try {
            clip = ser::load_wav(row.path);
        } catch (const ser::UserError& e) {
            throw ser::UserError(std::string("extract failed for ") + row.path + ": " + e.what());
        }
        auto [features, names] = ser::extract_rqa_features(clip, cfg);
        if (table.rows.empty()) {
            table.column_names = names;
            table.X = ser::Matrix(0, names.size());
        }
        ser::Matrix grown(table.n() + 1, table.m());
        for (std::size_t r = 0; r < table.n(); ++r)
            for (std::size_t c = 0; c < table.m(); ++c) grown(r, c) = table.X(r, c);
        for (std::size_t c = 0; c < table.m(); ++c) grown(table.n(), c) = features[c];
        table.X = std::move(grown);
        table.rows.push_back({row.id, row.speaker, row.session, row.label});
    }
    ser::write_table_csv(table, out_path);
    return 0;
}

ser::PipelineSpec make_pipeline_spec(const std::string& method, int L, int neighbors,
                                     unsigned seed, const std::string& metric,
                                     const std::string& clf, const std::string& mode,
                                     int max_iter, double tol, int ae_epochs) {
    ser::PipelineSpec spec;
    spec.dr_method = method;
    spec.L = L;
    spec.neighbors = neighbors;
    spec.seed = seed;
    spec.metric = ser::parse_metric(metric);
    spec.classifier = clf;
    spec.mode = mode == "oos" ? ser::PipelineSpec::Mode::oos_barycentric
                              : ser::PipelineSpec::Mode::transductive;
    spec.mds_max_iter = max_iter;
    spec.mds_rel_tol = tol;
    spec.ae_epochs = ae_epochs;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-rank speech emotion representation toolkit"};
    app.require_subcommand(1);

    // shared option storage
    std::string in_path, out_path, manifest_path;
    std::string method = "pca", metric = "euclidean", clf = "knn", scheme = "lospo";
    std::string mode = "transductive", fuse_path;
    int L = 2, neighbors = 10, max_iter = 300, ae_epochs = 200;
    unsigned seed = 42;
    double tol = 1e-6;

    ser::RqaConfig rqa_cfg;
    std::string eps_rule = "fraction_of_max";

    auto* extract = app.add_subcommand("extract", "extract RQA features from WAV files");
    extract->add_option("--manifest", manifest_path, "CSV manifest: path,id,speaker,session,label")
        ->required();
    extract->add_option("--out", out_path, "output feature CSV")->required();
    extract->add_option("--frame-len", rqa_cfg.frame_len, "frame length in seconds");
    extract->add_option("--hop", rqa_cfg.hop, "hop in seconds");
    extract->add_option("--tau", rqa_cfg.delay_tau, "embedding delay in samples (0 = auto)");
    extract->add_option("--d-embed", rqa_cfg.d_embed, "phase space dimension");
    extract->add_option("--eps-rule", eps_rule, "fixed | fraction_of_max | target_rr");
    extract->add_option("--eps", rqa_cfg.epsilon_value, "epsilon / fraction / target rate");
    extract->add_option("--l-min", rqa_cfg.l_min, "minimum diagonal line length");
    extract->add_option("--v-min", rqa_cfg.v_min, "minimum vertical line length");

    auto* reduce = app.add_subcommand("reduce", "reduce a feature table to L dimensions");
    reduce->add_option("--in", in_path, "input feature CSV")->required();
    reduce->add_option("--method", method,
                       "pca|cmds|smacof|psmds|nonmetric|isomap|lle|mlle|spectral|autoencoder")
        ->required();
    reduce->add_option("--L", L, "target dimension")->required();
    reduce->add_option("--out", out_path, "output embedding CSV")->required();
    reduce->add_option("--neighbors", neighbors, "neighborhood size k");
    reduce->add_option("--metric", metric, "euclidean|cosine");
    reduce->add_option("--seed", seed, "random seed");
    reduce->add_option("--max-iter", max_iter, "iterative MDS iteration cap");
    reduce->add_option("--tol", tol, "iterative MDS relative tolerance");
    reduce->add_option("--ae-epochs", ae_epochs, "autoencoder training epochs");

    auto* eval = app.add_subcommand("eval", "speaker-independent cross-validated evaluation");
    eval->add_option("--features", in_path, "feature CSV")->required();
    eval->add_option("--fuse", fuse_path, "second feature CSV fused by utterance id");
    eval->add_option("--scheme", scheme, "lospo|loso");
    eval->add_option("--dr", method, "DR method (or 'none')");
    eval->add_option("--L", L, "embedding dimension");
    eval->add_option("--clf", clf, "knn|lr|svm-linear|svm-rbf");
    eval->add_option("--mode", mode, "transductive|oos");
    eval->add_option("--neighbors", neighbors, "neighborhood size k");
    eval->add_option("--metric", metric, "euclidean|cosine");
    eval->add_option("--seed", seed, "random seed");
    eval->add_option("--max-iter", max_iter, "iterative MDS iteration cap");
    eval->add_option("--tol", tol, "iterative MDS relative tolerance");
    eval->add_option("--ae-epochs", ae_epochs, "autoencoder training epochs");
    eval->add_option("--out", out_path, "output report JSON")->required();

    ser::PlotSpec plot_spec;
    auto* plot = app.add_subcommand("plot", "render a 2-D embedding as an SVG scatter plot");
    plot->add_option("--in", in_path, "embedding CSV with exactly 2 dimensions")->required();
    plot->add_option("--out", out_path, "output SVG path")->required();
    plot->add_option("--width", plot_spec.width, "plot width in pixels");
    plot->add_option("--height", plot_spec.height, "plot height in pixels");
    plot->add_option("--radius", plot_spec.point_radius, "point radius");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            if (eps_rule == "fixed")
                rqa_cfg.epsilon_rule = ser::RqaConfig::EpsRule::fixed;
            else if (eps_rule == "fraction_of_max")
                rqa_cfg.epsilon_rule = ser::RqaConfig::EpsRule::fraction_of_max;
            else if (eps_rule == "target_rr")
                rqa_cfg.epsilon_rule = ser::RqaConfig::EpsRule::target_rr;
            else
                throw ser::UserError("unknown --eps-rule: " + eps_rule);
            return cmd_extract(manifest_path, rqa_cfg, out_path);
        }
        if (reduce->parsed()) {
            const auto table = ser::load_feature_csv(in_path);
            auto spec = make_pipeline_spec(method, L, neighbors, seed, metric, clf, mode,
                                           max_iter, tol, ae_epochs);
            ser::Embedding emb;
            try {
                emb = ser::run_dr(table.X, spec);
            } catch (const ser::NumericError& e) {
                throw ser::NumericError(method + ": " + e.what());
            } catch (const ser::UserError& e) {
                throw ser::UserError(method + ": " + e.what());
            }
            ser::write_table_csv(ser::with_features(table, emb.Y), out_path);
            return 0;
        }
        if (eval->parsed()) {
            auto table = ser::load_feature_csv(in_path);
            if (!fuse_path.empty()) table = ser::fuse_tables(table, ser::load_feature_csv(fuse_path));
            const auto plan = ser::make_folds(table.rows, ser::parse_scheme(scheme));
            const auto spec = make_pipeline_spec(method, L, neighbors, seed, metric, clf, mode,
                                                 max_iter, tol, ae_epochs);
            const auto report = ser::cross_validate(table, plan, spec);
            std::ofstream out(out_path);
            if (!out) throw ser::IoError("cannot write report: " + out_path);
            out << ser::report_to_json(report) << "\n";
            if (!out) throw ser::IoError("write failed: " + out_path);
            std::cout << "aggregate WA " << report.wa << " UA " << report.ua << "\n";
            return 0;
        }
        if (plot->parsed()) {
            const auto table = ser::load_feature_csv(in_path);
            plot_spec.x_label = table.m() >= 1 ? table.column_names[0] : "dim0";
            plot_spec.y_label = table.m() >= 2 ? table.column_names[1] : "dim1";
            ser::write_scatter_svg(table, plot_spec, out_path);
            return 0;
        }
    } catch (const ser::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ser::UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
