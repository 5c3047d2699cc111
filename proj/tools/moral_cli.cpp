// moralspace command-line interface: builds and evaluates a pluralist moral
// sentence-embedding space over externally supplied base embeddings.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "moral/classify.hpp"
#include "moral/cluster.hpp"
#include "moral/corpus.hpp"
#include "moral/embedstore.hpp"
#include "moral/error.hpp"
#include "moral/metrics.hpp"
#include "moral/report.hpp"
#include "moral/rng.hpp"
#include "moral/serial.hpp"
#include "moral/taxonomy.hpp"
#include "moral/trainer.hpp"
#include "moral/triples.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  // shared knobs, all settable from the flat config file
  std::uint64_t seed = 42;
  fs::path out = ".";
  std::string majority_rule = "strict";
  std::string scheme = "elements11";
  double train_fraction = 0.9;

  // projection-head training
  std::string mode = "supervised";
  double temperature = -1.0;  // resolved per mode when unset
  int batch_size = 32;
  int epochs = -1;  // resolved per mode when unset
  double learning_rate = 1e-3;
  std::size_t hidden_dim = 256;
  std::size_t out_dim = 128;
  double dropout = 0.1;

  // classification probe
  int folds = 5;
  int probe_epochs = 10;
  int probe_batch_size = 16;
  double probe_learning_rate = 0.01;
  double probe_dropout = 0.1;
  double threshold = 0.5;

  // metrics + clustering
  double alpha = 2.0;
  double t = 2.0;
  int k_min = 2;
  int k_max = 15;
  int restarts = 10;

  // synthetic fixture
  int fixture_docs_per_label = 40;
  std::size_t fixture_dim = 32;
  double fixture_sigma = 1.6;
  double fixture_center_scale = 1.0;
  int fixture_words_per_element = 12;

  // per-command paths
  fs::path corpus_path, base_path, lexicon_path, lexicon_base_path;
  fs::path train_ids_path, test_ids_path, ids_path, embeddings_path;
  fs::path triples_path, sim_csv_path;
  std::string token_overlap;  // "labelA,labelB"
};

moral::MajorityRule majority_rule_of(const Options& opt) {
  if (opt.majority_rule == "strict") return moral::MajorityRule::Strict;
  if (opt.majority_rule == "at_least_half") return moral::MajorityRule::AtLeastHalf;
  throw moral::data_error("unknown majority rule: " + opt.majority_rule);
}

moral::LabelScheme scheme_of(const Options& opt) {
  if (opt.scheme == "elements11") return moral::LabelScheme::Elements11;
  if (opt.scheme == "foundations6") return moral::LabelScheme::Foundations6;
  throw moral::data_error("unknown label scheme: " + opt.scheme);
}

// ingest pipeline shared by every corpus consumer: load, dedup, vote.
moral::Corpus load_resolved(const Options& opt) {
  moral::Corpus c = moral::load_corpus(opt.corpus_path);
  moral::resolve_labels(c, majority_rule_of(opt));
  return moral::collapse_duplicates(c, majority_rule_of(opt));
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw moral::data_error("cannot open id list: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_id_list(const std::vector<std::string>& ids, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw moral::data_error("cannot write id list: " + path.string());
  for (const std::string& id : ids) out << id << "\n";
}

moral::Corpus subset_by_ids(const moral::Corpus& c, const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  moral::Corpus out;
  for (const moral::Document& d : c.documents) {
    if (wanted.count(d.id)) {
      out.documents.push_back(d);
      out.domains.insert(d.domain);
      wanted.erase(d.id);
    }
  }
  if (!wanted.empty())
    throw moral::data_error("id list references unknown document: " + *wanted.begin());
  return out;
}

moral::EmbeddingStore restrict_store(const moral::EmbeddingStore& store,
                                     const std::vector<std::string>& ids) {
  moral::EmbeddingStore out(store.dim());
  for (const std::string& id : ids) {
    const auto v = store.at(id);
    out.insert(id, std::vector<float>(v.begin(), v.end()));
  }
  return out;
}

void ensure_out_dir(const Options& opt) {
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) throw moral::data_error("cannot create output directory: " + opt.out.string());
}

json error_breakdown_json(const moral::ErrorBreakdown& e) {
  return json{{"error_i", e.error_i},       {"error_ii", e.error_ii},
              {"error_iii", e.error_iii},   {"error_iv", e.error_iv},
              {"misclassified", e.misclassified}, {"total", e.total}};
}

// ---------------------------------------------------------------------------
// fixture: synthetic corpus + base embeddings + lexicon, one Gaussian blob
// per label in base space. Deterministic in the seed.
// ---------------------------------------------------------------------------
void run_fixture(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  Rng rng(opt.seed);
  const std::size_t dim = opt.fixture_dim;

  // 11 blob centers: 10 elements + non-moral.
  Matrix centers(11, dim);
  for (double& v : centers.data()) v = rng.normal() * opt.fixture_center_scale;

  Corpus corpus;
  EmbeddingStore base(dim);
  const std::array<std::string, 7> domains = {"alm", "baltimore", "blm",      "davidson",
                                              "election", "metoo", "sandy"};
  std::size_t counter = 0;
  for (std::uint8_t l = 0; l < 11; ++l) {
    const Label label(LabelScheme::Elements11, l);
    for (int i = 0; i < opt.fixture_docs_per_label; ++i) {
      Document d;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "doc%05zu", counter);
      d.id = buf;
      d.text = std::string("synthetic ") + std::string(label.name()) + " " + std::to_string(i);
      d.domain = domains[counter % domains.size()];
      d.annotator_labels.assign(3, LabelSet::of({label}));
      corpus.documents.push_back(std::move(d));
      corpus.domains.insert(domains[counter % domains.size()]);

      std::vector<float> v(dim);
      for (std::size_t c = 0; c < dim; ++c)
        v[c] = static_cast<float>(centers(l, c) + rng.normal() * opt.fixture_sigma);
      base.insert(buf, std::move(v));
      ++counter;
    }
  }
  save_corpus(corpus, opt.out / "corpus.jsonl");
  save_embeddings_binary(base, opt.out / "base.emb");

  // Lexicon words drawn from the element blobs (non-moral has no words).
  EmbeddingStore lexicon_base(dim);
  std::ofstream lex(opt.out / "lexicon.tsv");
  if (!lex) throw data_error("cannot write lexicon");
  lex << "# synthetic lexicon: word<TAB>element\n";
  for (std::uint8_t l = 0; l < 10; ++l) {
    const Label label(LabelScheme::Elements11, l);
    for (int w = 0; w < opt.fixture_words_per_element; ++w) {
      const std::string word = std::string(label.name()) + "_w" + std::to_string(w);
      lex << word << '\t' << label.name() << "\n";
      std::vector<float> v(dim);
      for (std::size_t c = 0; c < dim; ++c)
        v[c] = static_cast<float>(centers(l, c) + rng.normal() * opt.fixture_sigma);
      lexicon_base.insert(word, std::move(v));
    }
  }
  lex.close();
  save_embeddings_binary(lexicon_base, opt.out / "lexicon_base.emb");

  std::cout << "fixture: " << corpus.documents.size() << " documents, "
            << lexicon_base.size() << " lexicon words, dim " << dim << "\n";
}

// ---------------------------------------------------------------------------
void run_ingest(const Options& opt) {
  ensure_out_dir(opt);
  const moral::Corpus raw = moral::load_corpus(opt.corpus_path);
  moral::Corpus c = raw;
  moral::resolve_labels(c, majority_rule_of(opt));
  c = moral::collapse_duplicates(c, majority_rule_of(opt));

  moral::save_corpus(c, opt.out / "resolved.jsonl");

  const auto dist = moral::label_distribution(c);
  std::ofstream out(opt.out / "label_distribution.csv");
  if (!out) throw moral::data_error("cannot write label_distribution.csv");
  out << "label,count\r\n";
  for (const auto& [label, count] : dist) out << label.name() << ',' << count << "\r\n";

  if (!opt.token_overlap.empty()) {
    const auto comma = opt.token_overlap.find(',');
    if (comma == std::string::npos)
      throw moral::data_error("--token-overlap expects `labelA,labelB`");
    const auto a = moral::Label::parse(opt.token_overlap.substr(0, comma));
    const auto b = moral::Label::parse(opt.token_overlap.substr(comma + 1));
    if (!a || !b) throw moral::data_error("unknown label in --token-overlap");
    const auto rows = moral::token_overlap_report(c, *a, *b, 50);
    std::ofstream tok(opt.out / "token_overlap.csv");
    tok << "token,freq_a,freq_b\r\n";
    for (const auto& r : rows) tok << r.token << ',' << r.freq_a << ',' << r.freq_b << "\r\n";
  }

  std::cout << "ingest: " << raw.documents.size() << " documents in, " << c.documents.size()
            << " after duplicate collapse, " << c.domains.size() << " domains\n";
}

void run_split(const Options& opt) {
  ensure_out_dir(opt);
  const moral::Corpus c = load_resolved(opt);
  const auto [train, test] = moral::stratified_split(c, {opt.train_fraction, opt.seed});
  std::vector<std::string> train_ids, test_ids;
  for (const auto& d : train.documents) train_ids.push_back(d.id);
  for (const auto& d : test.documents) test_ids.push_back(d.id);
  write_id_list(train_ids, opt.out / "train_ids.txt");
  write_id_list(test_ids, opt.out / "test_ids.txt");
  std::cout << "split: " << train_ids.size() << " train / " << test_ids.size() << " test\n";
}

void run_triples(const Options& opt) {
  ensure_out_dir(opt);
  moral::Corpus c = load_resolved(opt);
  if (!opt.ids_path.empty()) c = subset_by_ids(c, read_id_list(opt.ids_path));

  const moral::TripleBuildReport report =
      scheme_of(opt) == moral::LabelScheme::Foundations6
          ? moral::build_triples_foundations(c, opt.seed)
          : moral::build_triples(c, opt.seed);
  moral::write_triples_csv(report, opt.out / "triples.csv");

  json j;
  j["triples"] = report.triples.size();
  j["opposite"] = report.opposite_count;
  j["outside"] = report.outside_count;
  j["positive_fallbacks"] = report.positive_fallbacks;
  j["negative_fallbacks"] = report.negative_fallbacks;
  j["unused_moral_ids"] = report.unused_moral_ids.size();
  moral::emit_metrics(j, opt.out / "triples_report.json");
  std::cout << "triples: " << report.triples.size() << " built (" << report.opposite_count
            << " opposite / " << report.outside_count << " outside), "
            << report.unused_moral_ids.size() << " morally-loaded left over\n";
}

void run_train(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  const EmbeddingStore base = load_embeddings(opt.base_path);
  const std::vector<std::string> train_ids = read_id_list(opt.train_ids_path);

  TrainConfig cfg;
  cfg.seed = opt.seed;
  cfg.batch_size = opt.batch_size;
  cfg.learning_rate = opt.learning_rate;
  cfg.hidden_dim = opt.hidden_dim;
  cfg.out_dim = opt.out_dim;
  cfg.dropout_p = opt.dropout;
  cfg.mode = opt.mode == "unsupervised" ? TrainMode::Unsupervised : TrainMode::Supervised;
  cfg.temperature =
      opt.temperature > 0 ? opt.temperature : (cfg.mode == TrainMode::Supervised ? 0.1 : 0.05);
  cfg.epochs = opt.epochs > 0 ? opt.epochs : (cfg.mode == TrainMode::Supervised ? 2 : 1);

  const ProjectionHead head =
      ProjectionHead::init(base.dim(), cfg.hidden_dim, cfg.out_dim, cfg.dropout_p, cfg.seed);

  TrainResult result{head, {}};
  if (cfg.mode == TrainMode::Supervised) {
    if (opt.triples_path.empty())
      throw data_error("supervised training needs --triples (build them with `triples`)");
    const TripleBuildReport triples = load_triples_csv(opt.triples_path);
    result = train_supervised(head, base, triples, cfg);
  } else {
    result = train_unsupervised(head, base, train_ids, cfg);
  }

  save_head(result.head, opt.out / "head.bin");
  write_loss_trace(result.epoch_loss, opt.out / "loss_trace.csv");

  save_embeddings_binary(encode_all(result.head, restrict_store(base, train_ids)),
                         opt.out / "moral_train.emb");
  if (!opt.test_ids_path.empty()) {
    const auto test_ids = read_id_list(opt.test_ids_path);
    save_embeddings_binary(encode_all(result.head, restrict_store(base, test_ids)),
                           opt.out / "moral_test.emb");
  }
  if (!opt.lexicon_base_path.empty()) {
    const EmbeddingStore lexicon_base = load_embeddings(opt.lexicon_base_path);
    save_embeddings_binary(encode_all(result.head, lexicon_base),
                           opt.out / "moral_lexicon.emb");
  }
  std::cout << "train: mode=" << opt.mode << " epochs=" << cfg.epochs
            << " final mean loss=" << result.epoch_loss.back() << "\n";
}

// Label groups for `eval sim`: corpus-resolved groups or lexicon elements.
// Groups too small for the diagonal are dropped with a note on stderr.
std::vector<std::pair<moral::Label, std::vector<std::string>>> make_groups(const Options& opt) {
  using namespace moral;
  std::vector<std::pair<Label, std::vector<std::string>>> groups;
  if (!opt.lexicon_path.empty()) {
    const auto lexicon = load_lexicon(opt.lexicon_path);
    std::map<std::uint8_t, std::vector<std::string>> by_element;
    for (const auto& e : lexicon) by_element[e.element.index()].push_back(e.word);
    for (auto& [idx, words] : by_element) {
      std::sort(words.begin(), words.end());
      groups.emplace_back(Label(LabelScheme::Elements11, idx), std::move(words));
    }
  } else {
    Corpus c = load_resolved(opt);
    if (!opt.ids_path.empty()) c = subset_by_ids(c, read_id_list(opt.ids_path));
    groups = label_groups(c, scheme_of(opt));
  }
  std::erase_if(groups, [](const auto& g) {
    if (g.second.size() < 2) {
      std::cerr << "note: dropping label '" << g.first.name() << "' with fewer than 2 members\n";
      return true;
    }
    return false;
  });
  if (groups.empty()) throw moral::data_error("eval sim: no label group has >= 2 members");
  return groups;
}

void run_eval_sim(const Options& opt) {
  ensure_out_dir(opt);
  const moral::EmbeddingStore store = moral::load_embeddings(opt.embeddings_path);
  const auto groups = make_groups(opt);
  const auto matrix = moral::moral_similarity(store, groups);
  moral::write_similarity_csv(matrix, opt.out / "similarity.csv");

  double diag = 0.0, off = 0.0;
  std::size_t off_n = 0;
  for (std::size_t r = 0; r < matrix.values.rows(); ++r) {
    diag += matrix.values(r, r);
    for (std::size_t c2 = r + 1; c2 < matrix.values.cols(); ++c2) {
      off += matrix.values(r, c2);
      ++off_n;
    }
  }
  diag /= static_cast<double>(matrix.values.rows());
  off = off_n ? off / static_cast<double>(off_n) : 0.0;
  std::cout << "eval sim: " << matrix.labels.size() << " labels, diagonal mean " << diag
            << ", off-diagonal mean " << off << "\n";
}

void run_eval_cluster(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  const EmbeddingStore store = load_embeddings(opt.embeddings_path);
  const auto lexicon = load_lexicon(opt.lexicon_path);
  if (lexicon.empty()) throw data_error("eval cluster: empty lexicon");

  std::vector<std::string> words;
  std::vector<int> truth;
  for (const auto& e : lexicon) {
    words.push_back(e.word);
    truth.push_back(e.element.index());
  }
  // sort by word for a stable row order
  std::vector<std::size_t> order(words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return words[a] < words[b]; });
  std::vector<std::string> sorted_words;
  std::vector<int> sorted_truth;
  for (std::size_t i : order) {
    sorted_words.push_back(words[i]);
    sorted_truth.push_back(truth[i]);
  }

  const Matrix points = store.align(sorted_words);
  const KSweepResult sweep =
      k_sweep(points, sorted_truth, opt.seed, opt.k_min, opt.k_max, opt.restarts);

  {
    std::ofstream out(opt.out / "sweep.csv");
    if (!out) throw data_error("cannot write sweep.csv");
    out << "k,silhouette,purity\r\n";
    char buf[64];
    for (const auto& q : sweep.per_k) {
      out << q.k << ',';
      int n = std::snprintf(buf, sizeof(buf), "%.17g", q.silhouette);
      out.write(buf, n);
      out << ',';
      n = std::snprintf(buf, sizeof(buf), "%.17g", q.purity);
      out.write(buf, n);
      out << "\r\n";
    }
  }
  {
    const auto& assignment = sweep.assignment_at_k(sweep.k_hat);
    std::ofstream out(opt.out / "assignment.csv");
    if (!out) throw data_error("cannot write assignment.csv");
    out << "id,cluster\r\n";
    for (std::size_t i = 0; i < sorted_words.size(); ++i)
      out << sorted_words[i] << ',' << assignment[i] << "\r\n";
  }

  json j;
  j["k_hat"] = sweep.k_hat;
  j["silhouette_at_k_hat"] = sweep.at_k(sweep.k_hat).silhouette;
  j["purity_at_k_hat"] = sweep.at_k(sweep.k_hat).purity;
  const int k_taxonomy = 10;
  if (sweep.per_k.back().k >= k_taxonomy && sweep.per_k.front().k <= k_taxonomy) {
    j["silhouette_at_10"] = sweep.at_k(k_taxonomy).silhouette;
    j["purity_at_10"] = sweep.at_k(k_taxonomy).purity;
  }
  moral::emit_metrics(j, opt.out / "cluster_summary.json");
  std::cout << "eval cluster: k_hat=" << sweep.k_hat << " silhouette="
            << sweep.at_k(sweep.k_hat).silhouette << " purity=" << sweep.at_k(sweep.k_hat).purity
            << "\n";
}

void run_eval_align(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  const EmbeddingStore store = load_embeddings(opt.embeddings_path);
  Corpus c = load_resolved(opt);
  if (!opt.ids_path.empty()) c = subset_by_ids(c, read_id_list(opt.ids_path));

  // Positive pairs: documents sharing an identical resolved label set.
  std::map<std::uint16_t, std::vector<const Document*>> by_bits;
  for (const Document& d : c.documents) by_bits[d.resolved.bits()].push_back(&d);

  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  std::vector<std::vector<double>> all_vectors;
  for (const Document& d : c.documents) {
    const auto v = store.at(d.id);
    all_vectors.emplace_back(v.begin(), v.end());
  }
  for (const auto& [bits, docs] : by_bits) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (std::size_t j = i + 1; j < docs.size(); ++j) {
        const auto a = store.at(docs[i]->id);
        const auto b = store.at(docs[j]->id);
        pairs.emplace_back(std::vector<double>(a.begin(), a.end()),
                           std::vector<double>(b.begin(), b.end()));
      }
    }
  }
  if (pairs.empty()) throw data_error("eval align: no positive pairs in the given split");

  json j;
  j["alignment"] = alignment(pairs, opt.alpha);
  j["uniformity"] = uniformity(all_vectors, opt.t);
  j["alpha"] = opt.alpha;
  j["t"] = opt.t;
  j["positive_pairs"] = pairs.size();
  j["vectors"] = all_vectors.size();
  moral::emit_metrics(j, opt.out / "align_uniformity.json");
  std::cout << "eval align: alignment=" << j["alignment"] << " uniformity=" << j["uniformity"]
            << " over " << pairs.size() << " pairs\n";
}

void run_eval_classify(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  const EmbeddingStore store = load_embeddings(opt.embeddings_path);
  Corpus c = load_resolved(opt);
  if (!opt.ids_path.empty()) c = subset_by_ids(c, read_id_list(opt.ids_path));
  if (c.documents.empty()) throw data_error("eval classify: empty corpus selection");

  const LabelScheme scheme = scheme_of(opt);
  std::vector<std::string> ids;
  std::vector<LabelSet> gold;
  for (const Document& d : c.documents) {
    ids.push_back(d.id);
    gold.push_back(scheme == LabelScheme::Elements11 ? d.resolved
                                                     : to_foundation_scheme(d.resolved));
  }
  const Matrix embeddings = store.align(ids);

  CVConfig cfg;
  cfg.folds = opt.folds;
  cfg.epochs = opt.probe_epochs;
  cfg.batch_size = opt.probe_batch_size;
  cfg.learning_rate = opt.probe_learning_rate;
  cfg.dropout = opt.probe_dropout;
  cfg.threshold = opt.threshold;
  cfg.seed = opt.seed;
  const CVReport report = cross_validate(embeddings, gold, cfg);

  {
    std::ofstream out(opt.out / "per_label_f1.csv");
    if (!out) throw data_error("cannot write per_label_f1.csv");
    out << "label,mean_f1,std_f1\r\n";
    char buf[64];
    for (const auto& [label, mean, sd] : report.per_label) {
      out << label.name() << ',';
      int n = std::snprintf(buf, sizeof(buf), "%.17g", mean);
      out.write(buf, n);
      out << ',';
      n = std::snprintf(buf, sizeof(buf), "%.17g", sd);
      out.write(buf, n);
      out << "\r\n";
    }
  }

  json j;
  j["micro_f1_mean"] = report.micro_mean;
  j["micro_f1_std"] = report.micro_std;
  j["macro_f1_mean"] = report.macro_mean;
  j["macro_f1_std"] = report.macro_std;
  j["folds"] = opt.folds;
  j["errors"] = error_breakdown_json(report.errors);
  moral::emit_metrics(j, opt.out / "classify_summary.json");
  std::cout << "eval classify: micro F1 " << report.micro_mean << " +- " << report.micro_std
            << ", macro F1 " << report.macro_mean << " +- " << report.macro_std << "\n";
}

void run_report(const Options& opt) {
  ensure_out_dir(opt);
  using namespace moral;
  bool did_anything = false;
  if (!opt.sim_csv_path.empty()) {
    const auto matrix = load_similarity_csv(opt.sim_csv_path);
    emit_heatmap(matrix, opt.out / "heatmap.svg");
    did_anything = true;
  }
  if (!opt.embeddings_path.empty()) {
    const EmbeddingStore store = load_embeddings(opt.embeddings_path);
    const Projection2D proj = pca2d(store);

    std::map<std::string, Label> labels;
    if (!opt.lexicon_path.empty()) {
      for (const auto& e : load_lexicon(opt.lexicon_path))
        labels.emplace(e.word, Label::element(e.element));
    } else if (!opt.corpus_path.empty()) {
      Corpus c = load_resolved(opt);
      if (!opt.ids_path.empty()) c = subset_by_ids(c, read_id_list(opt.ids_path));
      for (const Document& d : c.documents) {
        // color by the first resolved label in canonical order
        labels.emplace(d.id, d.resolved.labels().front());
      }
    }
    emit_scatter(proj, labels, opt.out / "scatter.svg");
    did_anything = true;
  }
  if (!did_anything)
    throw moral::data_error("report: nothing to do (pass --sim-csv and/or --embeddings)");
  std::cout << "report: plots written to " << opt.out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"moralspace: build and evaluate a pluralist moral embedding space"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat `key = value` configuration file");
  app.set_version_flag("--version", "moralspace 1.0.0");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "dump the resolved effective configuration");

  app.add_option("--seed", opt.seed, "global random seed")->capture_default_str();
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  app.add_option("--majority-rule", opt.majority_rule, "strict | at_least_half")
      ->check(CLI::IsMember({"strict", "at_least_half"}))
      ->capture_default_str();
  app.add_option("--scheme", opt.scheme, "elements11 | foundations6")
      ->check(CLI::IsMember({"elements11", "foundations6"}))
      ->capture_default_str();
  app.add_option("--train-fraction", opt.train_fraction)->capture_default_str();
  app.add_option("--temperature", opt.temperature,
                 "InfoNCE temperature (default 0.1 supervised / 0.05 unsupervised)");
  app.add_option("--batch-size", opt.batch_size)->capture_default_str();
  app.add_option("--epochs", opt.epochs, "training epochs (default 2 supervised / 1 unsupervised)");
  app.add_option("--learning-rate", opt.learning_rate)->capture_default_str();
  app.add_option("--hidden-dim", opt.hidden_dim)->capture_default_str();
  app.add_option("--out-dim", opt.out_dim)->capture_default_str();
  app.add_option("--dropout", opt.dropout)->capture_default_str();
  app.add_option("--folds", opt.folds)->capture_default_str();
  app.add_option("--probe-epochs", opt.probe_epochs)->capture_default_str();
  app.add_option("--probe-batch-size", opt.probe_batch_size)->capture_default_str();
  app.add_option("--probe-learning-rate", opt.probe_learning_rate)->capture_default_str();
  app.add_option("--probe-dropout", opt.probe_dropout)->capture_default_str();
  app.add_option("--threshold", opt.threshold)->capture_default_str();
  app.add_option("--alpha", opt.alpha, "alignment exponent")->capture_default_str();
  app.add_option("--t", opt.t, "uniformity temperature")->capture_default_str();
  app.add_option("--k-min", opt.k_min)->capture_default_str();
  app.add_option("--k-max", opt.k_max)->capture_default_str();
  app.add_option("--restarts", opt.restarts)->capture_default_str();
  app.add_option("--fixture-docs-per-label", opt.fixture_docs_per_label)->capture_default_str();
  app.add_option("--fixture-dim", opt.fixture_dim)->capture_default_str();
  app.add_option("--fixture-sigma", opt.fixture_sigma)->capture_default_str();
  app.add_option("--fixture-center-scale", opt.fixture_center_scale)->capture_default_str();
  app.add_option("--fixture-words-per-element", opt.fixture_words_per_element)
      ->capture_default_str();

  auto* fixture = app.add_subcommand("fixture", "generate the synthetic evaluation fixture");

  auto* ingest = app.add_subcommand("ingest", "load, dedup, majority-vote, report distribution");
  ingest->add_option("--corpus", opt.corpus_path, "JSON-lines corpus")->required();
  ingest->add_option("--token-overlap", opt.token_overlap,
                     "emit token_overlap.csv for `labelA,labelB`");

  auto* split = app.add_subcommand("split", "stratified train/test split; writes id lists");
  split->add_option("--corpus", opt.corpus_path)->required();

  auto* triples = app.add_subcommand("triples", "build contrastive triples");
  triples->add_option("--corpus", opt.corpus_path)->required();
  triples->add_option("--ids", opt.ids_path, "restrict to these document ids (one per line)");

  auto* train = app.add_subcommand("train", "train the projection head");
  train->add_option("--base", opt.base_path, "base embedding store")->required();
  train->add_option("--mode", opt.mode, "supervised | unsupervised")
      ->check(CLI::IsMember({"supervised", "unsupervised"}))
      ->required();
  train->add_option("--triples", opt.triples_path, "triples csv (supervised mode)");
  train->add_option("--train-ids", opt.train_ids_path)->required();
  train->add_option("--test-ids", opt.test_ids_path);
  train->add_option("--lexicon-base", opt.lexicon_base_path, "base vectors for lexicon words");

  auto* eval = app.add_subcommand("eval", "evaluation battery");
  eval->require_subcommand(1);
  auto* eval_sim = eval->add_subcommand("sim", "moral-similarity matrix");
  eval_sim->add_option("--embeddings", opt.embeddings_path)->required();
  eval_sim->add_option("--corpus", opt.corpus_path);
  eval_sim->add_option("--ids", opt.ids_path);
  eval_sim->add_option("--lexicon", opt.lexicon_path);
  auto* eval_cluster = eval->add_subcommand("cluster", "k-means sweep over lexicon embeddings");
  eval_cluster->add_option("--embeddings", opt.embeddings_path)->required();
  eval_cluster->add_option("--lexicon", opt.lexicon_path)->required();
  auto* eval_align = eval->add_subcommand("align", "alignment and uniformity");
  eval_align->add_option("--embeddings", opt.embeddings_path)->required();
  eval_align->add_option("--corpus", opt.corpus_path)->required();
  eval_align->add_option("--ids", opt.ids_path);
  auto* eval_classify = eval->add_subcommand("classify", "linear probe with cross-validation");
  eval_classify->add_option("--embeddings", opt.embeddings_path)->required();
  eval_classify->add_option("--corpus", opt.corpus_path)->required();
  eval_classify->add_option("--ids", opt.ids_path);

  auto* report = app.add_subcommand("report", "pca scatter and heatmaps");
  report->add_option("--sim-csv", opt.sim_csv_path, "similarity csv to render as a heatmap");
  report->add_option("--embeddings", opt.embeddings_path, "store to project with pca");
  report->add_option("--corpus", opt.corpus_path);
  report->add_option("--ids", opt.ids_path);
  report->add_option("--lexicon", opt.lexicon_path);

  for (CLI::App* sub : {fixture, ingest, split, triples, train, eval, report, eval_sim,
                        eval_cluster, eval_align, eval_classify})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  if (print_config) {
    std::cout << app.config_to_str(true, true);
    return 0;
  }

  try {
    if (fixture->parsed()) run_fixture(opt);
    else if (ingest->parsed()) run_ingest(opt);
    else if (split->parsed()) run_split(opt);
    else if (triples->parsed()) run_triples(opt);
    else if (train->parsed()) run_train(opt);
    else if (eval->parsed()) {
      if (eval_sim->parsed()) run_eval_sim(opt);
      else if (eval_cluster->parsed()) run_eval_cluster(opt);
      else if (eval_align->parsed()) run_eval_align(opt);
      else if (eval_classify->parsed()) run_eval_classify(opt);
    } else if (report->parsed()) run_report(opt);
  } catch (const moral::numeric_error& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 4;
  } catch (const moral::data_error& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
