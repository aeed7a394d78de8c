// Command-line front end: alignment, candidate generation, featurization,
// ranker training, prediction and evaluation, plus the end-to-end pipeline
// and the deterministic baselines.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include "bli/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numeric>

using namespace bli;

namespace {

struct SpaceOptions {
    std::size_t max_vocab = 200000;
    std::string norm = "center_l2";
};

void add_space_options(CLI::App* cmd, SpaceOptions& opts) {
    cmd->add_option("--max-vocab", opts.max_vocab, "vocabulary cap per space")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--norm", opts.norm, "normalization: center_l2 or l2")
        ->check(CLI::IsMember({"center_l2", "l2"}));
}

NormMode norm_from_string(const std::string& s) {
    return s == "l2" ? NormMode::l2 : NormMode::center_l2;
}

EmbeddingSpace load_space(const std::string& path, const SpaceOptions& opts,
                          const std::string& tag) {
    const EmbeddingSpace raw = load_embeddings(path, opts.max_vocab, tag);
    return normalize(raw, norm_from_string(opts.norm));
}

RowPairs dictionary_pairs(const Lexicon& lex, const EmbeddingSpace& source,
                          const EmbeddingSpace& target) {
    RowPairs pairs;
    for (const auto& [src, targets] : lex.entries) {
        const auto srow = source.lookup(src);
        if (!srow) continue;
        for (const auto& tgt : targets) {
            if (const auto trow = target.lookup(tgt)) pairs.emplace_back(*srow, *trow);
        }
    }
    if (pairs.empty()) throw InputError("no dictionary pair is covered by the vocabularies");
    return pairs;
}

// Rows of a features file regrouped into ranking queries, in file order.
// Rows of one query must be consecutive.
std::vector<RankingQuery> queries_from_records(const std::vector<FeatureRecord>& records,
                                               bool require_labels,
                                               std::vector<std::vector<std::string>>* tokens) {
    std::vector<RankingQuery> queries;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() && records[j].query == records[i].query) ++j;
        RankingQuery q;
        q.query_id = records[i].query;
        const std::size_t n = j - i;
        q.features.resize(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(records[i].values.size()));
        q.labels.resize(n);
        q.valid.assign(n, 1);
        std::vector<std::string> toks;
        for (std::size_t r = 0; r < n; ++r) {
            const FeatureRecord& rec = records[i + r];
            if (rec.values.size() != records[i].values.size()) {
                throw InputError("inconsistent feature width in query '" + q.query_id + "'");
            }
            if (require_labels && rec.label < 0) {
                throw InputError("unlabeled feature row for query '" + q.query_id +
                                 "'; featurize with --gold first");
            }
            q.labels[r] = std::max(rec.label, 0);
            for (std::size_t f = 0; f < rec.values.size(); ++f) {
                q.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
                    rec.values[f];
            }
            toks.push_back(rec.candidate);
        }
        q.check();
        queries.push_back(std::move(q));
        if (tokens) tokens->push_back(std::move(toks));
        i = j;
    }
    if (queries.empty()) throw InputError("feature file holds no queries");
    return queries;
}

std::vector<CandidateList> load_ranked_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open ranked file: " + path);
    std::vector<CandidateList> lists;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (cells.size() < 3 || cells.size() % 2 != 1) {
            throw InputError("malformed ranked line in " + path);
        }
        CandidateList list;
        list.source_word = cells[0];
        for (std::size_t c = 1; c + 1 < cells.size(); c += 2) {
            list.candidates.push_back({-1, cells[c], std::stod(cells[c + 1])});
        }
        lists.push_back(std::move(list));
    }
    if (lists.empty()) throw InputError("ranked file holds no lists: " + path);
    return lists;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bilingual lexicon induction toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value file");

    // ---- align ----------------------------------------------------------
    struct {
        std::string source, target, out_map, out_log;
        std::string method = "wproc";
        std::string pairs_dict, init_map;
        SpaceOptions space;
        WProcConfig wproc;
        RcslsConfig rcsls;
        std::string rcsls_constraint = "orthogonal";
        std::uint64_t seed = 0;
    } al;
    CLI::App* align_cmd = app.add_subcommand("align", "compute an alignment map");
    align_cmd->add_option("--source", al.source, "source .vec file")->required();
    align_cmd->add_option("--target", al.target, "target .vec file")->required();
    align_cmd->add_option("--out-map", al.out_map, "output map file")->required();
    align_cmd->add_option("--out-log", al.out_log, "convergence log CSV (wproc)");
    align_cmd->add_option("--method", al.method, "procrustes, wproc or rcsls")
        ->check(CLI::IsMember({"procrustes", "wproc", "rcsls"}));
    align_cmd->add_option("--pairs-dict", al.pairs_dict,
                          "supervision dictionary (procrustes/rcsls)");
    align_cmd->add_option("--init-map", al.init_map, "initial map for rcsls");
    align_cmd->add_option("--seed", al.seed, "random seed")->required();
    align_cmd->add_option("--batch-size", al.wproc.batch_size, "wproc batch size");
    align_cmd->add_option("--epochs", al.wproc.epochs, "wproc epochs");
    align_cmd->add_option("--iters-per-epoch", al.wproc.iters_per_epoch,
                          "wproc iterations per epoch");
    align_cmd->add_option("--learning-rate", al.wproc.learning_rate, "wproc learning rate");
    align_cmd->add_option("--sample-top", al.wproc.sample_top, "wproc sampling slice");
    std::string wproc_init = "procrustes_seed";
    align_cmd
        ->add_option("--init", wproc_init,
                     "wproc init: identity, random_orthogonal, procrustes_seed")
        ->check(CLI::IsMember({"identity", "random_orthogonal", "procrustes_seed"}));
    align_cmd->add_option("--rcsls-k", al.rcsls.k_neighbors, "rcsls neighborhood size");
    align_cmd->add_option("--rcsls-iters", al.rcsls.iterations, "rcsls iterations");
    align_cmd->add_option("--rcsls-step", al.rcsls.step_size, "rcsls step size");
    align_cmd->add_option("--rcsls-constraint", al.rcsls_constraint,
                          "orthogonal or spectral_ball")
        ->check(CLI::IsMember({"orthogonal", "spectral_ball"}));
    add_space_options(align_cmd, al.space);

    align_cmd->callback([&] {
        const EmbeddingSpace src = load_space(al.source, al.space, "src");
        const EmbeddingSpace tgt = load_space(al.target, al.space, "tgt");
        AlignmentMap map;
        if (al.method == "wproc") {
            WProcConfig cfg = al.wproc;
            cfg.seed = al.seed;
            if (wproc_init == "identity") {
                cfg.init = WProcInit::identity;
            } else if (wproc_init == "random_orthogonal") {
                cfg.init = WProcInit::random_orthogonal;
            } else {
                cfg.init = WProcInit::procrustes_seed;
            }
            auto [m, log] = wasserstein_procrustes(src, tgt, cfg);
            map = std::move(m);
            if (!al.out_log.empty()) save_convergence_log(log, al.out_log);
        } else {
            if (al.pairs_dict.empty()) {
                throw InputError(al.method + " alignment needs --pairs-dict");
            }
            const Lexicon lex = load_dictionary(al.pairs_dict);
            const RowPairs pairs = dictionary_pairs(lex, src, tgt);
            Matrix X(static_cast<Eigen::Index>(pairs.size()), src.dim());
            Matrix Y(static_cast<Eigen::Index>(pairs.size()), tgt.dim());
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                X.row(static_cast<Eigen::Index>(i)) = src.vectors.row(pairs[i].first);
                Y.row(static_cast<Eigen::Index>(i)) = tgt.vectors.row(pairs[i].second);
            }
            AlignmentMap q0 = procrustes(X, Y);
            if (al.method == "procrustes") {
                map = std::move(q0);
            } else {
                if (!al.init_map.empty()) q0 = load_alignment(al.init_map);
                RcslsConfig cfg = al.rcsls;
                cfg.constraint = al.rcsls_constraint == "spectral_ball"
                                     ? RcslsConstraint::spectral_ball
                                     : RcslsConstraint::orthogonal;
                map = rcsls_refine(src, tgt, pairs, q0, cfg);
            }
        }
        map.source_lang = src.lang_tag;
        map.target_lang = tgt.lang_tag;
        save_alignment(map, al.out_map);
    });

    // ---- candidates -------------------------------------------------------
    struct {
        std::string source, target, map, out, words_dict;
        int top_n = 0;
        int q = 10;
        std::string criterion = "nn";
        int csls_k = 10;
        double isf_beta = 30.0;
        SpaceOptions space;
    } ca;
    CLI::App* cand_cmd = app.add_subcommand("candidates", "top-q translation candidates");
    cand_cmd->add_option("--source", ca.source)->required();
    cand_cmd->add_option("--target", ca.target)->required();
    cand_cmd->add_option("--map", ca.map, "alignment map file")->required();
    cand_cmd->add_option("--out", ca.out, "output TSV")->required();
    cand_cmd->add_option("--words-dict", ca.words_dict,
                         "take query words from this dictionary");
    cand_cmd->add_option("--top-n", ca.top_n, "use the N most frequent source words");
    cand_cmd->add_option("--q", ca.q, "candidates per word");
    cand_cmd->add_option("--criterion", ca.criterion)
        ->check(CLI::IsMember({"nn", "csls", "isf"}));
    cand_cmd->add_option("--csls-k", ca.csls_k, "CSLS neighborhood size");
    cand_cmd->add_option("--isf-beta", ca.isf_beta, "ISF temperature");
    add_space_options(cand_cmd, ca.space);

    cand_cmd->callback([&] {
        const EmbeddingSpace src = load_space(ca.source, ca.space, "src");
        const EmbeddingSpace tgt = load_space(ca.target, ca.space, "tgt");
        const AlignmentMap map = load_alignment(ca.map);
        std::vector<int> rows;
        if (!ca.words_dict.empty()) {
            const Lexicon lex = load_dictionary(ca.words_dict);
            for (const auto& [word, targets] : lex.entries) {
                (void)targets;
                if (auto row = src.lookup(word)) rows.push_back(*row);
            }
            std::sort(rows.begin(), rows.end());
        } else if (ca.top_n > 0) {
            for (int i = 0; i < std::min(ca.top_n, src.size()); ++i) rows.push_back(i);
        } else {
            throw InputError("candidates needs --words-dict or --top-n");
        }
        const auto lists =
            generate_candidates(rows, map, src, tgt, ca.q, criterion_from_name(ca.criterion),
                                ca.csls_k, ca.isf_beta);
        save_candidates_tsv(lists, ca.out);
    });

    // ---- featurize --------------------------------------------------------
    struct {
        std::string source, target, map, candidates, out, gold;
        int k_max = 10;
        std::string relevance = "semi_binary";
        SpaceOptions space;
    } fe;
    CLI::App* feat_cmd =
        app.add_subcommand("featurize", "feature vectors for candidate lists");
    feat_cmd->add_option("--source", fe.source)->required();
    feat_cmd->add_option("--target", fe.target)->required();
    feat_cmd->add_option("--map", fe.map)->required();
    feat_cmd->add_option("--candidates", fe.candidates, "candidates TSV")->required();
    feat_cmd->add_option("--out", fe.out, "output CSV")->required();
    feat_cmd->add_option("--gold", fe.gold, "label against this dictionary");
    feat_cmd->add_option("--k-max", fe.k_max, "CSLS feature depth");
    feat_cmd->add_option("--relevance", fe.relevance)
        ->check(CLI::IsMember({"binary", "semi_binary", "continuous_intra"}));
    add_space_options(feat_cmd, fe.space);

    feat_cmd->callback([&] {
        const EmbeddingSpace src = load_space(fe.source, fe.space, "src");
        const EmbeddingSpace tgt = load_space(fe.target, fe.space, "tgt");
        const AlignmentMap map = load_alignment(fe.map);
        const auto lists = load_candidates_tsv(fe.candidates, src, tgt);
        NeighborhoodBundle bundle;
        if (fe.k_max > 0) bundle = compute_neighborhood_bundle(map, src, tgt, fe.k_max);
        std::optional<Lexicon> gold;
        if (!fe.gold.empty()) gold = load_dictionary(fe.gold);
        const RelevanceMode mode = relevance_from_name(fe.relevance);

        std::vector<FeatureRecord> records;
        int unlabeled = 0;
        for (const auto& list : lists) {
            const auto feats = extract_features(list, map, src, tgt, fe.k_max, bundle);
            std::vector<int> labels(list.candidates.size(), -1);
            if (gold && gold->contains(list.source_word)) {
                labels = assign_relevance(list, *gold, mode, &tgt);
            } else if (gold) {
                ++unlabeled;
            }
            for (std::size_t c = 0; c < list.candidates.size(); ++c) {
                records.push_back(
                    {list.source_word, list.candidates[c].token, labels[c], feats[c]});
            }
        }
        if (unlabeled > 0) {
            std::cerr << "note: " << unlabeled
                      << " query words missing from the gold dictionary were left unlabeled\n";
        }
        save_feature_csv(records, fe.k_max, fe.out);
    });

    // ---- train --------------------------------------------------------------
    struct {
        std::string features, cv_features, out_model, out_report;
        TrainConfig cfg;
        std::string loss = "approx_ndcg";
        std::uint64_t seed = 0;
    } tr;
    CLI::App* train_cmd = app.add_subcommand("train", "train the groupwise ranker");
    train_cmd->add_option("--features", tr.features, "labeled feature CSV")->required();
    train_cmd->add_option("--cv-features", tr.cv_features, "cross-validation feature CSV");
    train_cmd->add_option("--out-model", tr.out_model)->required();
    train_cmd->add_option("--out-report", tr.out_report, "training report CSV");
    train_cmd->add_option("--seed", tr.seed)->required();
    train_cmd->add_option("--iterations", tr.cfg.iterations);
    train_cmd->add_option("--batch-size", tr.cfg.batch_size);
    train_cmd->add_option("--learning-rate", tr.cfg.learning_rate);
    train_cmd->add_option("--epsilon", tr.cfg.epsilon);
    train_cmd->add_option("--loss", tr.loss)
        ->check(CLI::IsMember(
            {"sigmoid_ce", "pairwise_logistic", "softmax_ce", "approx_ndcg", "list_mle"}));
    train_cmd->add_option("--alpha", tr.cfg.loss.alpha, "ApproxNDCG sharpness");
    train_cmd->add_option("--loss-cutoff", tr.cfg.loss.cutoff, "ApproxNDCG rank cutoff");
    train_cmd->add_option("--group-size", tr.cfg.group_size);
    train_cmd->add_option("--dropout", tr.cfg.dropout_rate);
    train_cmd->add_option("--metric-cutoff", tr.cfg.metric_cutoff);
    train_cmd->add_option("--report-every", tr.cfg.report_every);

    train_cmd->callback([&] {
        const auto records = load_feature_csv(tr.features);
        const auto queries = queries_from_records(records, true, nullptr);
        std::vector<RankingQuery> cv;
        if (!tr.cv_features.empty()) {
            const auto cv_records = load_feature_csv(tr.cv_features);
            cv = queries_from_records(cv_records, true, nullptr);
        }
        TrainConfig cfg = tr.cfg;
        cfg.loss.kind = loss_from_name(tr.loss);
        cfg.seed = tr.seed;
        auto [model, report] = train_ranker(queries, cfg, cv);
        if (!tr.out_report.empty()) save_training_report(report, tr.out_report);
        if (report.diverged) {
            throw NumericError("training diverged: non-finite loss");
        }
        save_ranker(model, tr.out_model);
    });

    // ---- predict -------------------------------------------------------------
    struct {
        std::string model, features, out;
    } pr;
    CLI::App* pred_cmd =
        app.add_subcommand("predict", "rank candidates with a trained model");
    pred_cmd->add_option("--model", pr.model)->required();
    pred_cmd->add_option("--features", pr.features, "feature CSV")->required();
    pred_cmd->add_option("--out", pr.out, "ranked TSV")->required();

    pred_cmd->callback([&] {
        const RankerModel model = load_ranker(pr.model);
        const auto records = load_feature_csv(pr.features);
        std::vector<std::vector<std::string>> tokens;
        const auto queries = queries_from_records(records, false, &tokens);
        std::vector<CandidateList> ranked;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            const Vector scores = score_query(model, queries[qi], ScoreMode::eval);
            std::vector<int> order(tokens[qi].size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                if (scores[x] != scores[y]) return scores[x] > scores[y];
                return x < y;
            });
            CandidateList list;
            list.source_word = queries[qi].query_id;
            for (int idx : order) {
                list.candidates.push_back(
                    {-1, tokens[qi][static_cast<std::size_t>(idx)], scores[idx]});
            }
            ranked.push_back(std::move(list));
        }
        save_candidates_tsv(ranked, pr.out);
    });

    // ---- evaluate -------------------------------------------------------------
    struct {
        std::string ranked, gold, target, out;
        SpaceOptions space;
    } ev;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "precision of ranked translations");
    eval_cmd->add_option("--ranked", ev.ranked, "ranked TSV")->required();
    eval_cmd->add_option("--gold", ev.gold, "gold dictionary")->required();
    eval_cmd->add_option("--target", ev.target, "target .vec file")->required();
    eval_cmd->add_option("--out", ev.out, "result JSON")->required();
    add_space_options(eval_cmd, ev.space);

    eval_cmd->callback([&] {
        const EmbeddingSpace tgt = load_space(ev.target, ev.space, "tgt");
        const Lexicon gold = load_dictionary(ev.gold);
        const auto ranked = load_ranked_tokens(ev.ranked);
        const BliScore score = evaluate_bli(ranked, gold, tgt);

        PipelineConfig hash_cfg;
        hash_cfg.dict_eval = ev.gold;
        hash_cfg.emb_target = ev.target;
        hash_cfg.max_vocab = ev.space.max_vocab;

        InductionResult result;
        result.precision_at_1 = score.precision_at_1;
        result.precision_at_5 = score.precision_at_5;
        result.counts.input_words = static_cast<int>(ranked.size());
        result.counts.evaluated = score.evaluated;
        result.counts.excluded_no_gold = score.excluded_no_gold;
        result.counts.excluded_vocab = score.excluded_vocab;
        result.config_hash = config_hash(hash_cfg);
        save_result_json(result, ev.out);
        std::cout << "precision@1 " << score.precision_at_1 << "  precision@5 "
                  << score.precision_at_5 << "  evaluated " << score.evaluated << "\n";
    });

    // ---- rubi / baseline --------------------------------------------------------
    PipelineConfig pc;
    std::string pc_criterion = "nn";
    std::string pc_loss = "approx_ndcg";
    std::string pc_relevance = "semi_binary";
    std::string pc_norm = "center_l2";
    std::string pc_init = "procrustes_seed";

    auto add_pipeline_options = [&](CLI::App* cmd, bool with_pivot) {
        cmd->add_option("--source", pc.emb_source, "source .vec file")->required();
        cmd->add_option("--target", pc.emb_target, "target .vec file")->required();
        if (with_pivot) {
            cmd->add_option("--pivot", pc.emb_pivot, "pivot .vec file")->required();
            cmd->add_option("--train-dict", pc.dict_train, "source-pivot dictionary")
                ->required();
        }
        cmd->add_option("--eval-dict", pc.dict_eval, "source-target gold dictionary");
        cmd->add_option("--out", pc.out_dir, "run directory")->required();
        cmd->add_option("--seed", pc.seed, "random seed")->required();
        cmd->add_option("--lang-source", pc.lang_source);
        cmd->add_option("--lang-target", pc.lang_target);
        if (with_pivot) cmd->add_option("--lang-pivot", pc.lang_pivot);
        cmd->add_option("--max-vocab", pc.max_vocab)->check(CLI::PositiveNumber);
        cmd->add_option("--norm", pc_norm)->check(CLI::IsMember({"center_l2", "l2"}));
        cmd->add_option("--train-dict-size", pc.train_dict_size);
        cmd->add_option("--cv-dict-size", pc.cv_dict_size);
        cmd->add_option("--q", pc.query_size, "candidates per query");
        cmd->add_option("--k-max", pc.feature_k_max, "CSLS feature depth");
        cmd->add_option("--eval-size", pc.eval_size,
                        "evaluation words when no gold is given");
        cmd->add_option("--csls-k", pc.csls_k);
        cmd->add_option("--isf-beta", pc.isf_beta);
        cmd->add_option("--wproc-batch-size", pc.wproc.batch_size);
        cmd->add_option("--wproc-epochs", pc.wproc.epochs);
        cmd->add_option("--wproc-iters", pc.wproc.iters_per_epoch);
        cmd->add_option("--wproc-learning-rate", pc.wproc.learning_rate);
        cmd->add_option("--wproc-sample-top", pc.wproc.sample_top);
        cmd->add_option("--wproc-init", pc_init)
            ->check(CLI::IsMember({"identity", "random_orthogonal", "procrustes_seed"}));
        if (with_pivot) {
            cmd->add_option("--relevance", pc_relevance)
                ->check(CLI::IsMember({"binary", "semi_binary", "continuous_intra"}));
            cmd->add_option("--iterations", pc.train.iterations);
            cmd->add_option("--batch-size", pc.train.batch_size);
            cmd->add_option("--learning-rate", pc.train.learning_rate);
            cmd->add_option("--loss", pc_loss)
                ->check(CLI::IsMember({"sigmoid_ce", "pairwise_logistic", "softmax_ce",
                                       "approx_ndcg", "list_mle"}));
            cmd->add_option("--alpha", pc.train.loss.alpha);
            cmd->add_option("--loss-cutoff", pc.train.loss.cutoff);
            cmd->add_option("--group-size", pc.train.group_size);
            cmd->add_option("--dropout", pc.train.dropout_rate);
            cmd->add_option("--report-every", pc.train.report_every);
        }
    };

    auto resolve_wproc_init = [&] {
        if (pc_init == "identity") return WProcInit::identity;
        if (pc_init == "random_orthogonal") return WProcInit::random_orthogonal;
        return WProcInit::procrustes_seed;
    };

    CLI::App* rubi_cmd = app.add_subcommand("rubi", "end-to-end pivot-supervised induction");
    add_pipeline_options(rubi_cmd, true);
    rubi_cmd->callback([&] {
        pc.norm_mode = norm_from_string(pc_norm);
        pc.relevance = relevance_from_name(pc_relevance);
        pc.train.loss.kind = loss_from_name(pc_loss);
        pc.wproc.init = resolve_wproc_init();
        const InductionResult result = run_rubi_files(pc);
        if (result.precision_at_1 >= 0.0) {
            std::cout << "precision@1 " << result.precision_at_1 << "  precision@5 "
                      << result.precision_at_5 << "\n";
        } else {
            std::cout << "ranked lists written (no gold dictionary supplied)\n";
        }
    });

    CLI::App* base_cmd = app.add_subcommand("baseline", "deterministic criterion baseline");
    add_pipeline_options(base_cmd, false);
    base_cmd->add_option("--criterion", pc_criterion)
        ->check(CLI::IsMember({"nn", "csls", "isf"}));
    base_cmd->callback([&] {
        pc.norm_mode = norm_from_string(pc_norm);
        pc.wproc.init = resolve_wproc_init();
        const InductionResult result =
            run_baseline_files(pc, criterion_from_name(pc_criterion));
        if (result.precision_at_1 >= 0.0) {
            std::cout << "precision@1 " << result.precision_at_1 << "  precision@5 "
                      << result.precision_at_5 << "\n";
        } else {
            std::cout << "ranked lists written (no gold dictionary supplied)\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
