// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "aladin/autodiff/checkpoint.hpp"
#include "aladin/consensus/clean_corpus.hpp"
#include "aladin/core/errors.hpp"
#include "aladin/datagen/io.hpp"
#include "aladin/model/aladin_model.hpp"
#include "aladin/retrieval/discriminative.hpp"
#include "aladin/retrieval/metrics.hpp"
#include "aladin/retrieval/query.hpp"
#include "aladin/retrieval/store.hpp"
#include "aladin/train/trainer.hpp"

namespace aladin {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kCheckpointFormat = "aladin-checkpoint-1";
constexpr const char* kStoreFormat = "aladin-embeddings-1";
constexpr const char* kReportFormat = "aladin-report-1";
constexpr const char* kDataRootEnv = "ALADIN_DATA_ROOT";

// Output locations are not configuration; leaving them out keeps artifacts
// comparable across directories.
const std::vector<std::string> kOutputOptions = {"out", "curve", "csv", "votes", "stats"};

json resolved_config(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    std::string key = opt->get_single_name();
    if (key.empty() || key == "help" || key == "config") continue;
    if (std::find(kOutputOptions.begin(), kOutputOptions.end(), key) != kOutputOptions.end()) continue;
    std::vector<std::string> vals = opt->count() ? opt->results() : std::vector<std::string>{};
    if (vals.empty() && !opt->get_default_str().empty()) vals = {opt->get_default_str()};
    if (opt->get_expected_max() == 0 && vals.empty()) {
      j[key] = false;
    } else if (vals.empty()) {
      j[key] = nullptr;
    } else if (vals.size() == 1 && opt->get_expected_max() <= 1) {
      j[key] = vals.front();
    } else {
      j[key] = vals;
    }
  }
  j["command"] = sub.get_name();
  return j;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

void expect_header(const std::string& path, const std::string& first_line) {
  const std::string text = read_text(path);
  if (text.compare(0, first_line.size() + 1, first_line + "\n") != 0) {
    throw FormatError(path + ": unexpected header");
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "all") return Split::All;
  throw UsageError("split must be train|test|all, got '" + s + "'");
}

std::string data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return env;
  throw UsageError(std::string("no data directory: pass --data or set ") + kDataRootEnv);
}

template <class T>
std::unique_ptr<TrainableModel<T>> make_model(const std::string& kind, const json& cfg,
                                              std::uint64_t seed) {
  if (kind == "aladin") return std::make_unique<AladinModel<T>>(AladinConfig::from_json(cfg), seed);
  if (kind == "discriminative") {
    return std::make_unique<DiscriminativeEncoder<T>>(DiscriminativeConfig::from_json(cfg), seed);
  }
  throw UsageError("unknown model kind '" + kind + "'");
}

template <class T>
std::unique_ptr<TrainableModel<T>> load_model(const std::string& path) {
  const CheckpointHeader h = read_checkpoint_header(path);
  if (!h.config.contains("kind") || !h.config.contains("model")) {
    throw FormatError(path + ": checkpoint carries no model description");
  }
  auto model = make_model<T>(h.config["kind"].get<std::string>(), h.config["model"], 0);
  load_checkpoint(path, model->parameters());
  return model;
}

template <class T>
Tensor<float> embed_all(TrainableModel<T>& model, const Tensor<float>& images,
                        std::size_t batch = 64) {
  std::vector<Tensor<float>> parts;
  const std::size_t n = images.dim(0);
  for (std::size_t b = 0; b < n; b += batch) {
    const Tensor<T> chunk = slice_rows(images, b, std::min(n, b + batch)).template cast<T>();
    parts.push_back(model.retrieval_embedding(chunk).template cast<float>());
  }
  return concat_rows<float>(parts);
}

// ---------------------------------------------------------------- datagen

struct DatagenOpts {
  std::string out;
  std::uint64_t seed = 0;
  DatagenConfig cfg;
};

int cmd_datagen(const DatagenOpts& o, std::ostream& out) {
  const std::string dir = data_dir(o.out);
  Corpus c = gen_dataset(o.cfg, o.seed);
  save_corpus(dir, c);
  const json m = json::parse(read_text((fs::path(dir) / "manifest.json").string()));
  if (m.value("format", "") != "aladin-corpus-1" || m["images"].size() != c.num_images()) {
    throw FormatError("manifest did not round-trip");
  }
  out << "wrote " << c.num_images() << " images in " << c.styles.size() << " groups to " << dir
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  std::string data, partition = "cleaned", out, curve, init, semantic_checkpoint;
  std::string model = "aladin", variant = "S", adain = "std", group_by = "partition";
  std::string dtype = "float32";
  std::vector<int> style_channels, content_channels, disc_channels{32, 64, 128};
  int projection_hidden = 512, projection_out = 128, disc_hidden = 256, disc_embedding = 128;
  LossConfig lc;
  FitConfig fc;
  double lr = 1e-3, val_fraction = 0.1;
  std::uint64_t seed = 0;
};

json model_json(const TrainOpts& o) {
  if (o.model == "discriminative") {
    return {{"channels", o.disc_channels}, {"hidden", o.disc_hidden}, {"embedding", o.disc_embedding}};
  }
  if (o.model != "aladin") throw UsageError("--model must be aladin|discriminative");
  const AladinConfig base = o.variant == "L" ? AladinConfig::large() : AladinConfig::small();
  if (o.variant != "S" && o.variant != "L") throw UsageError("--variant must be S|L");
  return {{"variant", o.variant},
          {"style_channels", o.style_channels.empty() ? base.style_channels : o.style_channels},
          {"content_channels", o.content_channels.empty() ? base.content_channels : o.content_channels},
          {"projection_hidden", o.projection_hidden},
          {"projection_out", o.projection_out},
          {"adain_mode", o.adain}};
}

// Groups by content category instead of the partition: the supervision for
// the semantic encoder used in fusion and hard-negative mining.
GroupedDataset regroup_by_semantic(const GroupedDataset& ds) {
  GroupedDataset out;
  out.images = ds.images;
  out.semantic = ds.semantic;
  std::map<int, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < ds.semantic.size(); ++i) {
    if (ds.semantic[i] >= 0) by[ds.semantic[i]].push_back(i);
  }
  for (auto& [label, members] : by) out.groups.push_back(std::move(members));
  return out;
}

template <class T>
int train_impl(const TrainOpts& o, const json& resolved, std::ostream& out) {
  const std::string dir = data_dir(o.data);
  if (o.out.empty()) throw UsageError("train: --out is required");
  const Corpus corpus = load_corpus(dir);
  DatasetView view = make_view(corpus, o.partition, Split::Train);
  GroupedDataset all = o.group_by == "semantic" ? regroup_by_semantic(view.data) : view.data;
  if (o.group_by != "semantic" && o.group_by != "partition") {
    throw UsageError("--group-by must be partition|semantic");
  }

  Rng rng(o.seed);
  std::vector<std::size_t> order(all.num_groups());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::round(o.val_fraction * double(order.size())));
  std::vector<std::size_t> val_ids(order.begin(), order.begin() + std::ptrdiff_t(n_val));
  std::vector<std::size_t> train_ids(order.begin() + std::ptrdiff_t(n_val), order.end());
  std::sort(val_ids.begin(), val_ids.end());
  std::sort(train_ids.begin(), train_ids.end());
  const GroupedDataset train = subset_groups(all, train_ids);
  const GroupedDataset val = n_val ? subset_groups(all, val_ids) : GroupedDataset{};

  std::unique_ptr<TrainableModel<T>> model;
  const std::uint64_t model_seed = rng.next_u64();
  if (!o.init.empty()) {
    model = load_model<T>(o.init);
  } else {
    model = make_model<T>(o.model, model_json(o), model_seed);
  }

  LossConfig lc = o.lc;
  lc.validate();
  Objective<T> objective(lc, train.num_groups(), rng.next_u64());

  Tensor<float> group_sem;
  if (lc.hard_negatives) {
    if (o.semantic_checkpoint.empty()) {
      throw UsageError("--hard-negatives needs --semantic-checkpoint");
    }
    auto sem = load_model<float>(o.semantic_checkpoint);
    group_sem = group_semantic_centroids(train, embed_all(*sem, train.images));
  }

  FitConfig fc = o.fc;
  fc.adam.lr = o.lr;
  FitInputs inputs{&train, n_val ? &val : nullptr, lc.hard_negatives ? &group_sem : nullptr};
  const FitResult res = fit(*model, objective, inputs, fc, rng, [&](const CurvePoint& p) {
    if (p.val_ir1 >= 0) {
      out << "epoch " << p.epoch + 1 << " step " << p.step + 1 << " loss " << p.stats.loss
          << " val_ir1 " << p.val_ir1 << "\n";
    }
  });

  json meta = {{"format", kCheckpointFormat},
               {"kind", model->kind()},
               {"model", model->config_json()},
               {"dtype", o.dtype},
               {"loss", lc.to_json()},
               {"fit", fc.to_json()},
               {"provenance", resolved},
               {"result",
                {{"steps", res.steps},
                 {"epochs_run", res.epochs_run},
                 {"best_val_ir1", res.best_val_ir1},
                 {"best_epoch", res.best_epoch},
                 {"early_stopped", res.early_stopped},
                 {"hard_negative_fallbacks", res.hard_negative_fallbacks},
                 {"final_loss", res.curve.empty() ? 0.0 : res.curve.back().stats.loss}}}};
  save_checkpoint(o.out, model->parameters(), meta);
  if (read_checkpoint_header(o.out).config.value("format", "") != kCheckpointFormat) {
    throw FormatError(o.out + ": checkpoint did not round-trip");
  }
  if (!o.curve.empty()) {
    write_text(o.curve, curve_csv(res.curve));
    expect_header(o.curve, "step,epoch,loss,embedding,reconstruction,val_ir1");
  }
  out << "trained " << res.steps << " steps, checkpoint " << o.out << "\n";
  return 0;
}

int cmd_train(const TrainOpts& o, const json& resolved, std::ostream& out) {
  if (o.dtype == "float32") return train_impl<float>(o, resolved, out);
  if (o.dtype == "float64") return train_impl<double>(o, resolved, out);
  throw UsageError("--dtype must be float32|float64");
}

// ---------------------------------------------------------------- clean

struct CleanOpts {
  std::string data, votes, stats, name;
  int level = 3;
  std::size_t workers = kDefaultWorkers;
  double flip_rate = 0.1;
  std::uint64_t seed = 0;
};

int cmd_clean(const CleanOpts& o, const json& resolved, std::ostream& out) {
  const std::string dir = data_dir(o.data);
  Corpus corpus = load_corpus(dir);
  Rng rng(o.seed);
  const CorpusCleaning cleaning = clean_corpus(corpus, o.level, o.workers, o.flip_rate, rng);
  const auto& groups = cleaning.groups;
  const auto& projects = cleaning.projects;
  const auto& votes = cleaning.votes;
  const std::string name = o.name.empty() ? "consensus_c" + std::to_string(o.level) : o.name;
  if (name == "raw" || name == "cleaned") throw UsageError("partition name is reserved: " + name);
  corpus.partitions[name] = groups;
  corpus.partition_tags[name] = {{"source", "consensus"},
                                 {"level", o.level},
                                 {"workers", o.workers},
                                 {"flip_rate", o.flip_rate},
                                 {"provenance", resolved}};
  save_manifest(dir, corpus);
  const json m = json::parse(read_text((fs::path(dir) / "manifest.json").string()));
  if (!m["partitions"].contains(name)) throw FormatError("manifest lacks the new partition");

  if (!o.votes.empty()) {
    write_text(o.votes, votes_to_jsonl(votes));
    if (votes_from_jsonl(read_text(o.votes)).size() != votes.size()) {
      throw FormatError(o.votes + ": votes did not round-trip");
    }
  }
  if (!o.stats.empty()) {
    write_text(o.stats, consensus_csv(consensus_stats(projects, votes)));
    expect_header(o.stats, "level,groups,images,singletons");
  }
  out << "partition " << name << ": " << groups.size() << " groups from " << projects.size()
      << " projects\n";
  return 0;
}

// ---------------------------------------------------------------- embed

struct EmbedOpts {
  std::string data, checkpoint, fuse_with, fixture, out, partition = "cleaned", split = "test";
  std::string dtype = "float32";
  std::uint64_t seed = 0;
};

template <class T>
Tensor<float> embed_with(const std::string& path, const Tensor<float>& images) {
  auto model = load_model<T>(path);
  return embed_all(*model, images);
}

int cmd_embed(const EmbedOpts& o, const json& resolved, std::ostream& out) {
  const std::string dir = data_dir(o.data);
  if (o.out.empty()) throw UsageError("embed: --out is required");
  if (o.dtype != "float32" && o.dtype != "float64") throw UsageError("--dtype must be float32|float64");
  const Corpus corpus = load_corpus(dir);
  const DatasetView view = make_view(corpus, o.partition, parse_split(o.split));
  const std::size_t n = view.corpus_index.size();
  if (n == 0) throw DataError("embed: no images in " + o.partition + "/" + o.split);

  EmbeddingStore store;
  json meta = {{"format", kStoreFormat}, {"provenance", resolved}};
  if (o.fixture == "identity") {
    // One-hot by group: the perfect embedding.
    const std::size_t g = view.data.num_groups();
    store.vectors = Tensor<float>({n, g});
    for (std::size_t i = 0; i < n; ++i) store.vectors[i * g + std::size_t(view.group[i])] = 1.0f;
    meta["source"] = "identity";
  } else if (!o.fixture.empty()) {
    throw UsageError("unknown fixture '" + o.fixture + "'");
  } else {
    if (o.checkpoint.empty()) throw UsageError("embed: --checkpoint or --fixture is required");
    const auto& imgs = view.data.images;
    store.vectors = o.dtype == "float64" ? embed_with<double>(o.checkpoint, imgs)
                                         : embed_with<float>(o.checkpoint, imgs);
    meta["source"] = read_checkpoint_header(o.checkpoint).config;
    if (!o.fuse_with.empty()) {
      const Tensor<float> sem = o.dtype == "float64" ? embed_with<double>(o.fuse_with, imgs)
                                                     : embed_with<float>(o.fuse_with, imgs);
      meta["fused"] = {{"style_dim", store.vectors.dim(1)}, {"semantic_dim", sem.dim(1)}};
      store.vectors = fuse(store.vectors, sem);
    }
  }
  for (std::size_t ci : view.corpus_index) store.ids.push_back(static_cast<std::int64_t>(ci));
  meta["group"] = view.group;
  meta["style"] = view.style;
  store.meta = meta;
  save_embeddings(o.out, store);
  const EmbeddingStore back = load_embeddings(o.out);
  if (back.ids != store.ids || !std::ranges::equal(back.vectors.data(), store.vectors.data())) {
    throw FormatError(o.out + ": store did not round-trip");
  }
  out << "embedded " << n << " images, dim " << store.vectors.dim(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
  std::string embeddings, out, csv;
  bool held_out = false;
  std::size_t multi_image = 0;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalOpts& o, const json& resolved, std::ostream& out) {
  if (o.out.empty() && o.csv.empty()) throw UsageError("eval: pass --out and/or --csv");
  const EmbeddingStore store = load_embeddings(o.embeddings);
  const auto group = store.meta.at("group").get<std::vector<int>>();
  const auto style = store.meta.at("style").get<std::vector<int>>();
  EvalOptions eo;
  eo.held_out = o.held_out;
  const RetrievalReport rep = evaluate_retrieval(store.vectors, group, style, eo);

  json report = {{"format", kReportFormat},
                 {"provenance", resolved},
                 {"store", {{"count", store.ids.size()}, {"dim", store.vectors.dim(1)}}},
                 {"retrieval", rep.to_json()}};
  if (o.multi_image > 0) {
    const MultiImageResult mi = multi_image_experiment(store.vectors, group, o.multi_image);
    report["multi_image"] = {{"k", o.multi_image},
                             {"groups", mi.groups},
                             {"median_multi_rank", mi.median_multi_rank},
                             {"median_single_rank", mi.median_single_rank}};
  }
  if (!o.out.empty()) {
    write_text(o.out, report.dump(2) + "\n");
    if (json::parse(read_text(o.out)).value("format", "") != kReportFormat) {
      throw FormatError(o.out + ": report did not round-trip");
    }
  }
  if (!o.csv.empty()) {
    write_text(o.csv, rep.csv_header() + "\n" + rep.csv_row() + "\n");
    expect_header(o.csv, rep.csv_header());
  }
  out << "ir_top1 " << rep.ir_top1 << " map " << rep.map << " queries " << rep.queries << "\n";
  return 0;
}

// ---------------------------------------------------------------- gallery

struct GalleryOpts {
  std::string embeddings, data, out;
  std::size_t queries = 8, top_k = 6;
  std::uint64_t seed = 0;
};

std::string html_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '&': r += "&amp;"; break;
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

int cmd_gallery(const GalleryOpts& o, const json& resolved, std::ostream& out) {
  const std::string dir = data_dir(o.data);
  if (o.out.empty()) throw UsageError("gallery: --out is required");
  const EmbeddingStore store = load_embeddings(o.embeddings);
  const json manifest = json::parse(read_text((fs::path(dir) / "manifest.json").string()));
  const auto& images = manifest.at("images");
  const auto group = store.meta.at("group").get<std::vector<int>>();
  const std::size_t n = store.ids.size();
  if (o.top_k == 0 || o.top_k >= n) throw UsageError("--top-k must be in [1, count)");

  const fs::path out_dir = fs::absolute(fs::path(o.out)).parent_path();
  auto src = [&](std::int64_t id) {
    const std::string file = images.at(std::size_t(id)).at("file").get<std::string>();
    return fs::relative(fs::absolute(fs::path(dir) / file), out_dir).generic_string();
  };

  Rng rng(o.seed);
  const auto picks = rng.sample_without_replacement(n, std::min(o.queries, n));
  const EmbeddingIndex index(store.ids, store.vectors);
  const std::size_t d = store.vectors.dim(1);

  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>aladin gallery</title>\n"
    << "<style>body{font-family:sans-serif}td{text-align:center;font-size:11px}"
    << "img{width:96px;height:96px;image-rendering:pixelated}"
    << ".q{outline:3px solid #333}.hit{outline:3px solid #2a2}.miss{outline:3px solid #c33}</style>\n"
    << "<!-- " << html_escape(resolved.dump()) << " -->\n</head><body>\n<table>\n";
  for (std::size_t q : picks) {
    const std::int64_t qid = store.ids[q];
    const auto hits = index.query(store.vectors.raw() + q * d, d, o.top_k, &qid);
    h << "<tr><td><img class=\"q\" src=\"" << html_escape(src(qid)) << "\"><br>query " << qid
      << "</td>";
    for (const Hit& hit : hits) {
      const std::size_t row = index.position(hit.id);
      const bool same = group[row] == group[q];
      char score[32];
      std::snprintf(score, sizeof score, "%.3f", hit.score);
      h << "<td><img class=\"" << (same ? "hit" : "miss") << "\" src=\"" << html_escape(src(hit.id))
        << "\"><br>" << score << "</td>";
    }
    h << "</tr>\n";
  }
  h << "</table>\n</body></html>\n";
  write_text(o.out, h.str());
  expect_header(o.out, "<!DOCTYPE html>");
  out << "gallery with " << picks.size() << " queries written to " << o.out << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Style retrieval pipeline: synthetic data, training, cleaning, search and evaluation."};
  app.set_config("--config", "", "TOML file with option values; [command] sections, flags win");
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kDataRootEnv + " is the default for --data/--out data dirs.");

  DatagenOpts dg;
  auto* s_dg = app.add_subcommand("datagen", "Generate the synthetic style corpus");
  s_dg->add_option("--out", dg.out, "Corpus directory");
  s_dg->add_option("--seed", dg.seed, "Random seed")->required();
  s_dg->add_option("--groups", dg.cfg.num_groups, "Number of groups (one style each)")->capture_default_str();
  s_dg->add_option("--images-per-group", dg.cfg.images_per_group, "Images per group")->capture_default_str();
  s_dg->add_option("--size", dg.cfg.size, "Image side in pixels")->capture_default_str();
  s_dg->add_option("--contamination", dg.cfg.contamination, "Chance a raw-group slot holds a foreign style")
      ->capture_default_str();
  s_dg->add_option("--test-fraction", dg.cfg.test_fraction, "Fraction of groups held out for test")
      ->capture_default_str();
  s_dg->add_option("--family-size", dg.cfg.family_size, "Groups per near-identical style family")
      ->capture_default_str();
  s_dg->add_option("--family-mutations", dg.cfg.family_mutations, "Fields changed within a family")
      ->capture_default_str();

  TrainOpts tr;
  auto* s_tr = app.add_subcommand("train", "Train a model and write a checkpoint and loss curve");
  s_tr->add_option("--data", tr.data, "Corpus directory");
  s_tr->add_option("--partition", tr.partition, "Grouping to train on (raw, cleaned or a named one)")
      ->capture_default_str();
  s_tr->add_option("--out", tr.out, "Checkpoint path");
  s_tr->add_option("--curve", tr.curve, "Loss curve CSV path");
  s_tr->add_option("--seed", tr.seed, "Random seed")->required();
  s_tr->add_option("--model", tr.model, "aladin|discriminative")->capture_default_str();
  s_tr->add_option("--variant", tr.variant, "S|L style branch depth")->capture_default_str();
  s_tr->add_option("--style-channels", tr.style_channels, "Style encoder channels per layer");
  s_tr->add_option("--content-channels", tr.content_channels, "Content encoder channels per layer");
  s_tr->add_option("--projection-hidden", tr.projection_hidden, "Projection hidden width")
      ->capture_default_str();
  s_tr->add_option("--projection-out", tr.projection_out, "Projection output width")->capture_default_str();
  s_tr->add_option("--adain-mode", tr.adain, "std|variance")->capture_default_str();
  s_tr->add_option("--disc-channels", tr.disc_channels, "Discriminative encoder channels")
      ->capture_default_str();
  s_tr->add_option("--disc-hidden", tr.disc_hidden, "Discriminative hidden width")->capture_default_str();
  s_tr->add_option("--disc-embedding", tr.disc_embedding, "Discriminative embedding width")
      ->capture_default_str();
  s_tr->add_option("--group-by", tr.group_by, "partition|semantic supervision")->capture_default_str();
  s_tr->add_option("--init", tr.init, "Checkpoint to fine-tune; overrides the model flags");
  s_tr->add_option("--dtype", tr.dtype, "float32|float64")->capture_default_str();
  s_tr->add_option_function<std::string>(
         "--loss", [&](const std::string& s) { tr.lc.kind = parse_loss_kind(s); },
         "contrastive|triplet|listwise|softmax|recon-only")
      ->default_str("contrastive");
  s_tr->add_option("--tau", tr.lc.tau, "Contrastive temperature")->capture_default_str();
  s_tr->add_option("--lambda-rec", tr.lc.lambda_rec, "Reconstruction weight")->capture_default_str();
  s_tr->add_option("--margin", tr.lc.margin, "Triplet margin")->capture_default_str();
  s_tr->add_option_function<std::string>(
         "--contrastive-form",
         [&](const std::string& s) {
           if (s != "printed" && s != "supcon") throw CLI::ValidationError("--contrastive-form", "printed|supcon");
           tr.lc.form = s == "printed" ? ContrastiveForm::AsPrinted : ContrastiveForm::SupCon;
         },
         "printed|supcon")
      ->default_str("printed");
  s_tr->add_flag("--use-projection,!--no-projection", tr.lc.use_projection,
                 "Compute the loss on the projection head output")
      ->capture_default_str();
  s_tr->add_flag("--augment", tr.lc.augmentation, "Random crop, flip and colour jitter");
  s_tr->add_flag("--hard-negatives", tr.lc.hard_negatives, "Build batches from semantically close groups");
  s_tr->add_option("--hn-threshold", tr.lc.hn_threshold, "Semantic distance bound for hard negatives")
      ->capture_default_str();
  s_tr->add_option("--semantic-checkpoint", tr.semantic_checkpoint,
                   "Discriminative checkpoint supplying semantic embeddings");
  s_tr->add_option("--epochs", tr.fc.epochs, "Epochs")->capture_default_str();
  s_tr->add_option("--steps-per-epoch", tr.fc.steps_per_epoch, "Steps per epoch; 0 covers the data once")
      ->capture_default_str();
  s_tr->add_option("--batch-groups", tr.fc.batch_groups, "Groups per batch (two images each)")
      ->capture_default_str();
  s_tr->add_option("--chunk-size", tr.fc.chunk_size, "Rows per accumulation chunk; 0 disables")
      ->capture_default_str();
  s_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  s_tr->add_option("--lr-decay", tr.fc.lr_decay, "Learning-rate factor per epoch")->capture_default_str();
  s_tr->add_option("--patience", tr.fc.patience, "Epochs without improvement before stopping")
      ->capture_default_str();
  s_tr->add_option("--val-fraction", tr.val_fraction, "Training groups kept for validation")
      ->capture_default_str();

  CleanOpts cl;
  auto* s_cl = app.add_subcommand("clean", "Simulate annotators over raw groups and add a consensus partition");
  s_cl->add_option("--data", cl.data, "Corpus directory");
  s_cl->add_option("--seed", cl.seed, "Random seed")->required();
  s_cl->add_option("--consensus-level", cl.level, "Minimum co-selecting workers per edge")
      ->capture_default_str();
  s_cl->add_option("--workers", cl.workers, "Simulated workers per project")->capture_default_str();
  s_cl->add_option("--flip-rate", cl.flip_rate, "Per-image worker error rate")->capture_default_str();
  s_cl->add_option("--name", cl.name, "Partition name (default consensus_c<level>)");
  s_cl->add_option("--votes", cl.votes, "Votes JSONL output");
  s_cl->add_option("--stats", cl.stats, "Per-level statistics CSV output");

  EmbedOpts em;
  auto* s_em = app.add_subcommand("embed", "Compute an embedding store for a corpus slice");
  s_em->add_option("--data", em.data, "Corpus directory");
  s_em->add_option("--checkpoint", em.checkpoint, "Model checkpoint");
  s_em->add_option("--fuse-with", em.fuse_with, "Discriminative checkpoint to concatenate");
  s_em->add_option("--fixture", em.fixture, "identity: one-hot group vectors, no model");
  s_em->add_option("--partition", em.partition, "Grouping recorded with the vectors")->capture_default_str();
  s_em->add_option("--split", em.split, "train|test|all")->capture_default_str();
  s_em->add_option("--dtype", em.dtype, "float32|float64 inference")->capture_default_str();
  s_em->add_option("--out", em.out, "Store path");
  s_em->add_option("--seed", em.seed, "Random seed")->required();

  EvalOpts ev;
  auto* s_ev = app.add_subcommand("eval", "Score an embedding store");
  s_ev->add_option("--embeddings", ev.embeddings, "Store path")->required();
  s_ev->add_flag("--held-out", ev.held_out, "Drop same-group results; relevance by style");
  s_ev->add_option("--multi-image", ev.multi_image, "Also run k-image group queries")->capture_default_str();
  s_ev->add_option("--out", ev.out, "Report JSON path");
  s_ev->add_option("--csv", ev.csv, "Report CSV path");
  s_ev->add_option("--seed", ev.seed, "Random seed")->required();

  GalleryOpts ga;
  auto* s_ga = app.add_subcommand("gallery", "Write an HTML page of queries and their nearest neighbours");
  s_ga->add_option("--embeddings", ga.embeddings, "Store path")->required();
  s_ga->add_option("--data", ga.data, "Corpus directory holding the images");
  s_ga->add_option("--out", ga.out, "HTML path");
  s_ga->add_option("--queries", ga.queries, "Query rows")->capture_default_str();
  s_ga->add_option("--top-k", ga.top_k, "Results per row")->capture_default_str();
  s_ga->add_option("--seed", ga.seed, "Random seed for the query pick")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "aladin: usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (s_dg->parsed()) return cmd_datagen(dg, out);
    if (s_tr->parsed()) return cmd_train(tr, resolved_config(*s_tr), out);
    if (s_cl->parsed()) return cmd_clean(cl, resolved_config(*s_cl), out);
    if (s_em->parsed()) return cmd_embed(em, resolved_config(*s_em), out);
    if (s_ev->parsed()) return cmd_eval(ev, resolved_config(*s_ev), out);
    if (s_ga->parsed()) return cmd_gallery(ga, resolved_config(*s_ga), out);
  } catch (const UsageError& e) {
    err << "aladin: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "aladin: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace aladin
