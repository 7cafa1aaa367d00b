// qintent command-line driver. One subcommand per pipeline stage; every
// command prints `fingerprint=<hex>` plus key=value result lines on stdout and
// a single `error ...` line on stderr when it fails.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qintent/annotate.hpp"
#include "qintent/checkpoint.hpp"
#include "qintent/corpus.hpp"
#include "qintent/embedding.hpp"
#include "qintent/error.hpp"
#include "qintent/fingerprint.hpp"
#include "qintent/gold.hpp"
#include "qintent/grid_search.hpp"
#include "qintent/models.hpp"
#include "qintent/rules.hpp"
#include "qintent/train_eval.hpp"
#include "qintent/weak_label.hpp"

#ifndef QINTENT_DATA_DIR
#define QINTENT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace qintent;

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kMissingFile = 2, kBadConfig = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string quoted(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '"') c = '\'';
  return '"' + s + '"';
}

int fail(int code, std::string_view kind, const std::string& msg) {
  std::cerr << "error code=" << code << " kind=" << kind << " msg=" << quoted(msg) << '\n';
  return code;
}

std::string data_dir() {
  if (const char* env = std::getenv("QINTENT_DATA")) return env;
  return QINTENT_DATA_DIR;
}

const std::string& require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("--") + what + " is required");
  if (!fs::is_regular_file(path)) throw MissingFile(std::string(what) + " file '" + path + "' not found");
  return path;
}

std::ifstream open_in(const std::string& path, const char* what) {
  require_file(path, what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw ConfigError("an output path is required");
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

template <class F>
auto config_value(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------- options

struct EmbOptions {
  std::string path;
  std::string kind = "pretrained";
  std::string vocab;
  std::size_t dim = 0;

  void add(CLI::App* app) {
    app->add_option("--emb", path, "Pretrained embedding text file (word v1 ... vd)");
    app->add_option("--emb-kind", kind, "pretrained | onehot")->check(CLI::IsMember({"pretrained", "onehot"}));
    app->add_option("--vocab", vocab, "One-hot vocabulary file (word<TAB>index)");
    app->add_option("--emb-dim", dim, "Expected embedding dimension (0 = from file)");
  }
  bool given() const { return !path.empty() || kind == "onehot"; }
  std::shared_ptr<const EmbeddingTable> load() const {
    if (kind == "onehot") {
      auto in = open_in(vocab, "vocab");
      return std::make_shared<EmbeddingTable>(read_one_hot_vocab(in));
    }
    require_file(path, "emb");
    return std::make_shared<EmbeddingTable>(
        load_pretrained_file(path, dim ? std::optional<std::size_t>(dim) : std::nullopt));
  }
  std::string describe() const {
    return kind == "onehot" ? "onehot:" + std::filesystem::path(vocab).filename().string()
                            : std::filesystem::path(path).filename().string();
  }
};

struct RuleOptions {
  std::string version = "v4";
  std::string rules;
  std::string row_mapping;
  std::string stopwords;
  std::string synonyms;
  std::string exclude;
  std::string ext1;
  std::string ext1_corpus;
  std::size_t top_k = 50;
  std::string distance;
  double threshold = -1;
  EmbOptions emb;

  void add(CLI::App* app, bool with_emb = true) {
    app->add_option("--version", version, "Labeler version v1..v8");
    app->add_option("--rules", rules, "Keyword-set file (default: bundled set for the version)");
    app->add_option("--row-mapping", row_mapping, "as-printed | swapped-tn (default: swapped-tn from v4, as-printed before)");
    app->add_option("--stopwords", stopwords, "Stopword list (default: bundled English list, v3+)");
    app->add_option("--synonyms", synonyms, "Synonym lexicon (default: bundled, v5+)");
    app->add_option("--exclude", exclude, "Words removed from similarity candidates (v7+)");
    app->add_option("--ext1", ext1, "Ext-1 export (id<TAB>i,t,n) for the v3 top-word statistics");
    app->add_option("--ext1-corpus", ext1_corpus, "Corpus manifest the Ext-1 ids refer to");
    app->add_option("--top-k", top_k, "Top words per intent merged in v3");
    app->add_option("--distance", distance, "squared-l2 | l1 | cosine (similarity versions)");
    app->add_option("--threshold", threshold, "Similarity threshold (similarity versions)");
    if (with_emb) emb.add(app);
  }

  LabelerVersion parsed_version() const { return config_value([&] { return parse_version(version); }); }

  KeywordRuleSet build(std::shared_ptr<const EmbeddingTable> table = nullptr) const {
    const LabelerVersion v = parsed_version();
    const RowMapping mapping = config_value([&] {
      if (!row_mapping.empty()) return parse_row_mapping(row_mapping);
      return v >= LabelerVersion::V4 ? RowMapping::SwappedTN : RowMapping::AsPrinted;
    });
    std::string path = rules;
    if (path.empty()) path = data_dir() + (v <= LabelerVersion::V3 ? "/rules/v1.kws" : "/rules/v4.kws");
    auto in = open_in(path, "rules");
    auto r = make_rule_set(v, read_keyword_sections(in), mapping);
    if (r.uses_stopwords()) {
      auto s = open_in(stopwords.empty() ? data_dir() + "/stopwords_en.txt" : stopwords, "stopwords");
      r.stopwords = read_word_list(s);
    }
    if (r.uses_synonyms()) {
      auto s = open_in(synonyms.empty() ? data_dir() + "/synonyms_v5.txt" : synonyms, "synonyms");
      r.synonyms = read_synonyms(s);
    }
    if (v == LabelerVersion::V3 && !ext1.empty()) {
      auto ein = open_in(ext1, "ext1");
      const auto labels = import_ext1(ein);
      auto min = open_in(ext1_corpus, "ext1-corpus");
      const auto slice = read_manifest(min);
      std::vector<std::pair<std::vector<std::string>, MultiHotLabel>> labeled;
      for (const auto& q : slice.records)
        if (auto it = labels.find(static_cast<std::int64_t>(q.record_index)); it != labels.end())
          labeled.emplace_back(q.tokens, it->second);
      merge_top_words(r, top_words_per_intent(labeled, r.stopwords, top_k));
    }
    if (!exclude.empty()) {
      auto s = open_in(exclude, "exclude");
      r.similarity_exclusions = read_word_list(s);
    }
    const bool similarity = r.policy == MatchPolicy::Similarity || r.policy == MatchPolicy::SimilarityExactFirst;
    if (similarity) {
      if (!table) {
        if (!emb.given()) throw ConfigError(version + " needs --emb or --emb-kind onehot");
        table = emb.load();
      }
      r.embedding = table;
      r.distance = config_value([&] { return parse_distance(distance.empty() ? "squared-l2" : distance); });
      r.threshold = threshold >= 0 ? threshold : 20.0;
    }
    config_value([&] {
      r.validate();
      return 0;
    });
    return r;
  }
};

struct ModelOptions {
  std::string arch = "rnn1";
  std::uint64_t seed = 0;
  std::size_t epochs = 20;
  double lr = 0.01;
  double momentum = 0.9;
  double train_fraction = 0.8;

  void add(CLI::App* app) {
    app->add_option("--arch", arch, "rnn1 | rnn2 | rnn3 | cnn1");
    app->add_option("--seed", seed, "Seed for initialization, split and shuffling");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--lr", lr, "SGD learning rate");
    app->add_option("--momentum", momentum, "SGD momentum");
    app->add_option("--train-fraction", train_fraction, "Train share of the split");
  }
};

// Config file contents are spliced in right after the subcommand name so that
// flags given on the command line (later) win under TakeLast.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  if (!fs::is_regular_file(path)) throw MissingFile("config file '" + path + "' not found");
  std::ifstream in(path);
  std::vector<std::string> injected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    injected.push_back("--" + key + "=" + value);
  }
  // Insert after the first positional (the subcommand).
  std::size_t pos = 0;
  while (pos < rest.size() && rest[pos].rfind("-", 0) == 0) ++pos;
  if (pos < rest.size()) ++pos;
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos), injected.begin(), injected.end());
  return rest;
}

void print_fingerprint(const std::string& command, const std::vector<std::pair<std::string, std::string>>& fields) {
  Fingerprint fp;
  fp.add_field("command", command);
  for (const auto& [k, v] : fields) fp.add_field(k, v);
  std::cout << "fingerprint=" << fp.hex() << '\n';
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fingerprint_of(content);
}

CorpusSlice load_corpus(const std::string& path, char delimiter) {
  auto in = open_in(path, "in");
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (first.rfind("# qintent-corpus", 0) == 0) return read_manifest(in);
  CsvReader reader(in, delimiter);
  return slice_first_n(reader, static_cast<std::size_t>(-1));
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qintent: weakly supervised query intent pipeline"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  std::string config_note;
  app.add_option("--config", config_note, "key=value file; keys are long flag names, command-line flags win");
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--jobs", jobs, "Worker threads");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Slice a keyword export into a corpus manifest");
  std::string in_path, out_path, rejects, lang, sidecar;
  std::string delimiter = ",";
  std::size_t first_n = 1000000;
  ingest->add_option("--in", in_path, "Keyword export (6 delimited columns)")->required();
  ingest->add_option("--out", out_path, "Manifest output")->required();
  ingest->add_option("--delimiter", delimiter, "Field delimiter");
  ingest->add_option("--first-n", first_n, "Keep the first N records");
  ingest->add_option("--lang", lang, "Keep only this language (needs --lang-sidecar)");
  ingest->add_option("--lang-sidecar", sidecar, "index<TAB>lang detections");
  ingest->add_option("--rejects", rejects, "Copy malformed rows here");
  ingest->add_option("--jobs", jobs, "Worker threads");

  // label
  auto* label = app.add_subcommand("label", "Weakly label a corpus and write the training file");
  RuleOptions label_rules;
  label_rules.add(label);
  std::string oov = "all";
  label->add_option("--in", in_path, "Corpus manifest or keyword export")->required();
  label->add_option("--out", out_path, "Labeled corpus output (tokens<TAB>i,t,n)");
  label->add_option("--delimiter", delimiter, "Delimiter when --in is a keyword export");
  label->add_option("--oov-policy", oov, "all: drop when no token is embedded; any: drop when one is missing")
      ->check(CLI::IsMember({"all", "any"}));
  label->add_option("--jobs", jobs, "Worker threads");

  // stats
  auto* stats = app.add_subcommand("stats", "Labeling statistics of a labeled corpus");
  std::string labels_path;
  stats->add_option("--labels", labels_path, "Labeled corpus")->required();

  // gold-build
  auto* gold_build = app.add_subcommand("gold-build", "Aggregate annotations into GT-2 and GT-3");
  std::string annotations, queries, out_dir = ".";
  gold_build->add_option("--annotations", annotations, "query_id<TAB>annotator<TAB>i,t,n<TAB>mode")->required();
  gold_build->add_option("--queries", queries, "query_id<TAB>text")->required();
  gold_build->add_option("--out-dir", out_dir, "Writes gt2.tsv, gt3.tsv, summary.tsv");

  // gridsearch
  auto* grid = app.add_subcommand("gridsearch", "V8 search over embeddings, distances and thresholds");
  RuleOptions grid_rules;
  grid_rules.add(grid, false);
  std::string gold_path, distances = "squared-l2,l1,cosine", thresholds, report;
  std::vector<std::string> grid_embs;
  grid->add_option("--gold", gold_path, "Gold file (tokens<TAB>i,t,n)")->required();
  grid->add_option("--grid-emb", grid_embs, "NAME=PATH pretrained embedding, repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->required();
  grid->add_option("--distances", distances, "Comma-separated distance kinds");
  grid->add_option("--thresholds", thresholds, "Comma-separated thresholds")->required();
  grid->add_option("--report", report, "Write the full ranked table here");
  grid->add_option("--jobs", jobs, "Worker threads");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a labeled corpus");
  ModelOptions model;
  model.add(train_cmd);
  EmbOptions train_emb;
  train_emb.add(train_cmd);
  train_cmd->add_option("--labels", labels_path, "Labeled corpus")->required();
  train_cmd->add_option("--out", out_path, "Checkpoint output");
  std::string history;
  train_cmd->add_option("--history", history, "Per-epoch loss/accuracy table");

  // eval
  auto* eval = app.add_subcommand("eval", "Multi-modal accuracy of a checkpoint on gold sets");
  std::string ckpt_path, gold3_path, dataset = "-", labeling = "-";
  EmbOptions eval_emb;
  eval_emb.add(eval);
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--gold", gold_path, "GT-2 style gold file")->required();
  eval->add_option("--gold3", gold3_path, "Optional GT-3 gold file for the second column");
  eval->add_option("--dataset", dataset, "Dataset label for the results row");
  eval->add_option("--labeling", labeling, "Labeling label for the results row");

  // eval-rules
  auto* eval_rules = app.add_subcommand("eval-rules", "Score labeling rules directly on a gold set");
  RuleOptions er_rules;
  er_rules.add(eval_rules);
  eval_rules->add_option("--gold", gold_path, "Gold file")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Per-query predictions next to the gold weights");
  EmbOptions pred_emb;
  pred_emb.add(predict);
  predict->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  predict->add_option("--gold", gold_path, "Gold file")->required();
  predict->add_option("--out", out_path, "Write rows here instead of stdout");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  std::string annotators, log_path, host = "127.0.0.1", static_dir;
  int port = 8080;
  serve->add_option("--queries", queries, "query_id<TAB>text")->required();
  serve->add_option("--annotators", annotators, "annotator<TAB>mode")->required();
  serve->add_option("--log", log_path, "Append-only label log")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 = ephemeral)");
  serve->add_option("--static", static_dir, "UI bundle directory served at /");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kBadConfig, "invalid-config", e.what());
  } catch (const MissingFile& e) {
    return fail(kMissingFile, "missing-file", e.what());
  } catch (const ConfigError& e) {
    return fail(kBadConfig, "invalid-config", e.what());
  }

  auto* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  std::vector<std::pair<std::string, std::string>> fields;
  for (const auto* opt : cmd->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--jobs" || opt->get_name() == "--help") continue;
    std::string v;
    for (const auto& r : opt->results()) v += r + ';';
    fields.emplace_back(opt->get_name(), v);
  }

  try {
    if (cmd == ingest) {
      if (delimiter.size() != 1) throw ConfigError("--delimiter must be one character");
      auto in = open_in(in_path, "in");
      std::ofstream rej;
      if (!rejects.empty()) rej = open_out(rejects);
      CsvReader reader(in, delimiter[0], rejects.empty() ? nullptr : &rej);
      CorpusSlice slice;
      if (!lang.empty()) {
        auto sc = open_in(sidecar, "lang-sidecar");
        SidecarLanguageDetector det(sc);
        slice = slice_by_language(reader, std::cref(det), lang);
      } else {
        slice = slice_first_n(reader, first_n);
      }
      auto out = open_out(out_path);
      write_manifest(out, slice);
      fields.emplace_back("input", file_digest(in_path));
      print_fingerprint(name, fields);
      std::cout << "slice=" << slice.name << "\ninput=" << slice.input_size << "\nkept=" << slice.records.size()
                << "\nmalformed=" << reader.skipped() << '\n';
      for (const auto& [reason, n] : slice.filter_log) std::cout << "drop." << reason << '=' << n << '\n';
    } else if (cmd == label) {
      const auto rules = label_rules.build();
      const Labeler labeler(rules);
      const auto slice = load_corpus(in_path, delimiter.empty() ? ',' : delimiter[0]);
      fields.emplace_back("rules", rules.canonical());
      fields.emplace_back("input", file_digest(in_path));
      const auto labels = label_all(slice, labeler, jobs);
      const auto st = labeling_stats(labels);
      std::shared_ptr<const EmbeddingTable> emb = rules.embedding;
      if (!emb && label_rules.emb.given()) emb = label_rules.emb.load();
      std::vector<LabeledQuery> out_rows;
      std::size_t no_embedding = 0;
      for (std::size_t i = 0; i < slice.records.size(); ++i) {
        if (!labels[i]) continue;
        const auto& toks = slice.records[i].tokens;
        if (emb) {
          const auto n = std::count_if(toks.begin(), toks.end(), [&](const auto& t) { return emb->contains(t); });
          const bool drop = oov == "any" ? n != static_cast<long>(toks.size()) : n == 0;
          if (drop) {
            ++no_embedding;
            continue;
          }
        }
        out_rows.push_back({toks, to_distribution(*labels[i])});
      }
      if (!out_path.empty()) {
        auto out = open_out(out_path);
        write_labeled(out, out_rows);
      }
      print_fingerprint(name, fields);
      std::cout << "version=" << version_name(rules.version) << '\n' << format_stats(st) << '\n';
      std::cout << "drop.no-embedding=" << no_embedding << "\nwritten=" << out_rows.size() << '\n';
    } else if (cmd == stats) {
      auto in = open_in(labels_path, "labels");
      const auto rows = read_labeled(in);
      std::vector<std::optional<MultiHotLabel>> labels;
      for (const auto& r : rows) labels.emplace_back(r.target.support());
      fields.emplace_back("input", file_digest(labels_path));
      print_fingerprint(name, fields);
      std::cout << format_stats(labeling_stats(labels)) << '\n';
    } else if (cmd == gold_build) {
      auto ain = open_in(annotations, "annotations");
      auto qin = open_in(queries, "queries");
      const auto build = build_gold(read_annotations(ain), read_query_texts(qin));
      fs::create_directories(out_dir);
      auto g2 = open_out((fs::path(out_dir) / "gt2.tsv").string());
      write_gold(g2, build.gt2);
      auto g3 = open_out((fs::path(out_dir) / "gt3.tsv").string());
      write_gold(g3, build.gt3);
      const auto summary = format_gold_summary(build);
      auto sf = open_out((fs::path(out_dir) / "summary.tsv").string());
      sf << summary;
      fields.emplace_back("annotations.digest", file_digest(annotations));
      fields.emplace_back("queries.digest", file_digest(queries));
      print_fingerprint(name, fields);
      std::cout << "gt2=" << build.gt2.entries.size() << "\ngt3=" << build.gt3.entries.size()
                << "\ninvalid=" << build.validation.size() << '\n';
      for (const auto& [id, why] : build.validation) std::cout << "invalid." << id << '=' << quoted(why) << '\n';
      std::cout << summary;
    } else if (cmd == grid) {
      auto gin = open_in(gold_path, "gold");
      const auto gold = read_gold(gin, "gold");
      std::vector<NamedEmbedding> embs;
      for (const auto& spec : grid_embs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--grid-emb expects NAME=PATH, got '" + spec + "'");
        const std::string path = spec.substr(eq + 1);
        require_file(path, "grid-emb");
        embs.push_back({spec.substr(0, eq), std::make_shared<EmbeddingTable>(load_pretrained_file(path))});
      }
      std::vector<DistanceKind> kinds;
      for (const auto& d : split_list(distances)) kinds.push_back(config_value([&] { return parse_distance(d); }));
      std::vector<double> ts;
      for (const auto& t : split_list(thresholds)) {
        try {
          std::size_t used = 0;
          ts.push_back(std::stod(t, &used));
          if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
          throw ConfigError("bad threshold '" + t + "'");
        }
      }
      RuleOptions base_opts = grid_rules;
      base_opts.version = "v5";  // exact-match sets with synonyms; the grid adds similarity
      const auto base = base_opts.build();
      if (gold.entries.empty()) throw InvariantError("gold set is empty");
      const auto points = grid_search_v8(gold, embs, kinds, ts, base, jobs);
      fields.emplace_back("rules", base.canonical());
      fields.emplace_back("gold.digest", file_digest(gold_path));
      const auto table = format_grid_report(points);
      if (!report.empty()) {
        auto out = open_out(report);
        out << table;
      }
      print_fingerprint(name, fields);
      const auto& best = points.front();
      std::cout << "best.embedding=" << best.embedding_name << "\nbest.distance=" << distance_name(best.kind)
                << "\nbest.threshold=" << best.threshold << "\nbest.hamming=" << best.hamming
                << "\nbest.percent_labeled=" << best.percent_labeled << '\n';
      if (report.empty()) std::cout << table;
    } else if (cmd == train_cmd) {
      const Arch arch = config_value([&] { return parse_arch(model.arch); });
      auto lin = open_in(labels_path, "labels");
      const auto corpus = read_labeled(lin);
      std::shared_ptr<const EmbeddingTable> emb;
      if (train_emb.kind == "onehot" && train_emb.vocab.empty()) {
        // Vocabulary from the training file, saved next to the checkpoint.
        CorpusSlice slice;
        for (std::size_t i = 0; i < corpus.size(); ++i) slice.records.push_back({i, corpus[i].tokens});
        emb = std::make_shared<EmbeddingTable>(build_one_hot(slice));
        if (!out_path.empty()) {
          auto vout = open_out(out_path + ".vocab");
          write_one_hot_vocab(vout, *emb);
        }
      } else {
        if (!train_emb.given()) throw ConfigError("train needs --emb or --emb-kind onehot");
        emb = train_emb.load();
      }
      const SplitPlan plan{model.seed, model.train_fraction};
      const auto parts = config_value([&] { return split(corpus, plan); });
      const auto spec = ModelSpec::reference(arch, emb->dim(), model.seed);
      config_value([&] {
        spec.validate();
        return 0;
      });
      TrainConfig tc;
      tc.epochs = model.epochs;
      tc.lr = model.lr;
      tc.momentum = model.momentum;
      tc.shuffle_seed = model.seed;
      const auto result = config_value([&] { return train(spec, parts.train, parts.validation, *emb, tc); });
      if (!out_path.empty()) save_checkpoint(out_path, result.best);
      if (!history.empty()) {
        auto h = open_out(history);
        h << "epoch\ttrain_loss\tval_loss\tval_accuracy\n";
        for (const auto& r : result.history)
          h << r.epoch << '\t' << r.train_loss << '\t' << r.val_loss << '\t' << r.val_accuracy << '\n';
      }
      fields.emplace_back("spec", spec.canonical());
      fields.emplace_back("labels.digest", file_digest(labels_path));
      print_fingerprint(name, fields);
      std::cout << "params=" << count_params(spec) << "\ntrain=" << parts.train.size()
                << "\nvalidation=" << parts.validation.size() << "\nskipped=" << result.skipped_train
                << "\nbest_epoch=" << result.best.epoch;
      if (auto it = result.best.metrics.find("val_accuracy"); it != result.best.metrics.end())
        std::cout << "\nval_accuracy=" << it->second;
      std::cout << "\ncheckpoint_hash=" << result.best.hash() << '\n';
      if (result.diverged) {
        std::cout << "diverged=" << quoted(result.diagnostic) << '\n';
        return fail(kRuntime, "diverged", result.diagnostic);
      }
    } else if (cmd == eval || cmd == predict) {
      const auto& emb_opts = cmd == eval ? eval_emb : pred_emb;
      require_file(ckpt_path, "checkpoint");
      const auto ckpt = load_checkpoint(ckpt_path);
      const auto net = ckpt.restore();
      if (!emb_opts.given()) throw ConfigError(name + " needs --emb or --emb-kind onehot");
      const auto emb = emb_opts.load();
      if (emb->dim() != ckpt.spec.input_dim)
        throw ConfigError("embedding dimension " + std::to_string(emb->dim()) + " does not match checkpoint input_dim " +
                          std::to_string(ckpt.spec.input_dim));
      auto gin = open_in(gold_path, "gold");
      const auto gold = read_gold(gin, fs::path(gold_path).stem().string());
      if (gold.entries.empty()) throw InvariantError("gold set is empty");
      fields.emplace_back("checkpoint", ckpt.hash());
      fields.emplace_back("gold.digest", file_digest(gold_path));
      if (cmd == eval) {
        const auto r2 = evaluate(*net, gold, *emb);
        std::optional<EvalReport> r3;
        if (!gold3_path.empty()) {
          auto g3in = open_in(gold3_path, "gold3");
          r3 = evaluate(*net, read_gold(g3in, fs::path(gold3_path).stem().string()), *emb);
        }
        Fingerprint fp;
        fp.add_field("command", name);
        for (const auto& [k, v] : fields) fp.add_field(k, v);
        std::cout << "fingerprint=" << fp.hex() << '\n';
        std::cout << "accuracy=" << r2.accuracy << "\nanswered_accuracy=" << r2.accuracy_answered
                  << "\nabstained=" << r2.abstained << "\ntotal=" << r2.total << '\n';
        ResultRow row{dataset, labeling, arch_name(ckpt.spec.arch), emb_opts.describe(), r2.accuracy,
                      r3 ? r3->accuracy : 0.0, ckpt.epoch, fp.hex()};
        std::cout << format_result_header() << '\n' << format_result_row(row) << '\n';
      } else {
        const auto rows = predict_report(*net, gold, *emb);
        std::ostringstream body;
        for (const auto& r : rows) body << format_prediction_row(r) << '\n';
        print_fingerprint(name, fields);
        if (out_path.empty()) {
          std::cout << body.str();
        } else {
          auto out = open_out(out_path);
          out << body.str();
          std::cout << "rows=" << rows.size() << '\n';
        }
      }
    } else if (cmd == eval_rules) {
      const auto rules = er_rules.build();
      const Labeler labeler(rules);
      auto gin = open_in(gold_path, "gold");
      const auto gold = read_gold(gin, fs::path(gold_path).stem().string());
      if (gold.entries.empty()) throw InvariantError("gold set is empty");
      const auto r = evaluate_rules(labeler, gold);
      fields.emplace_back("rules", rules.canonical());
      fields.emplace_back("gold.digest", file_digest(gold_path));
      print_fingerprint(name, fields);
      std::cout << "version=" << version_name(rules.version) << "\ntotal=" << r.total << "\nlabeled=" << r.labeled
                << "\ncorrect=" << r.correct << "\naccuracy=" << r.accuracy
                << "\npercent_labeled=" << r.percent_labeled
                << "\naccuracy_undefined=" << (r.accuracy_undefined ? "true" : "false") << '\n';
    } else if (cmd == serve) {
      auto qin = open_in(queries, "queries");
      std::map<std::int64_t, std::vector<std::string>> qs;
      for (const auto& [id, text] : read_query_texts(qin))
        if (auto t = tokenize(text)) qs[id] = *t;
      auto ain = open_in(annotators, "annotators");
      AnnotationStore store(std::move(qs), read_annotators(ain), log_path);
      AnnotationServer server(store, static_dir);
      const int bound = server.start(host, port);
      fields.emplace_back("queries.digest", file_digest(queries));
      print_fingerprint(name, fields);
      std::cout << "listening=" << host << ':' << bound << "\nreplay_discarded=" << store.replay_discarded()
                << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
  } catch (const MissingFile& e) {
    return fail(kMissingFile, "missing-file", e.what());
  } catch (const ConfigError& e) {
    return fail(kBadConfig, "invalid-config", e.what());
  } catch (const IoError& e) {
    return fail(kMissingFile, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, "runtime", e.what());
  }
  return kOk;
}
