#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "swipeauth/eval.hpp"
#include "swipeauth/rng.hpp"
#include "swipeauth/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace swipeauth;

namespace {

std::vector<Context> parse_contexts(const std::string& list) {
  if (list == "all")
    return {Context::S1_ReadSit, Context::S2_ReadWalk, Context::S3_MapSit,
            Context::S4_MapWalk};
  std::set<Context> out;
  std::string token;
  std::stringstream ss(list);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.insert(context_from_string(token));
  }
  if (out.empty()) throw InvalidConfig("empty context list: " + list);
  return {out.begin(), out.end()};
}

// JSON config files: flat object of option names (without the leading
// dashes); command-line flags override config keys, keys starting with an
// underscore are comments. Applied at the start of each subcommand callback,
// filling only options the command line left unset.
std::string config_scalar(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

void apply_json_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw CLI::ConfigError(path + ": " + e.what());
  }
  if (!j.is_object())
    throw CLI::ConfigError(path + ": config must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    if (!key.empty() && key.front() == '_') continue;
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr) op = cmd->get_option_no_throw(key);
    if (op == nullptr) throw CLI::ConfigError("unknown config key: " + key);
    if (op->count() > 0) continue;  // flags override config keys
    if (val.is_array())
      for (const auto& v : val) op->add_result(config_scalar(v));
    else
      op->add_result(config_scalar(val));
    op->run_callback();
  }
}

// Required values may come from either the command line or the config file,
// so the check runs after apply_json_config instead of using ->required().
void require_opt(CLI::App* cmd, const std::string& name) {
  if (cmd->get_option(name)->count() == 0) throw CLI::RequiredError(name);
}

ColumnMap load_map(const std::string& path) {
  return path.empty() ? ColumnMap::synth_default() : ColumnMap::load(path);
}

void write_manifest(const fs::path& path, const std::string& command,
                    const json& config) {
  json m;
  m["tool"] = "swipeauth";
  m["schema_version"] = 1;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = fnv1a64_hex(config.dump());
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << m.dump(2) << "\n";
}

// Manifest for a single output file lives next to it as <stem>.manifest.json.
void write_file_manifest(const fs::path& out_file, const std::string& command,
                         const json& config) {
  fs::path dir = out_file.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path mpath = dir / (out_file.stem().string() + ".manifest.json");
  write_manifest(mpath, command, config);
}

std::string context_list_string(const std::vector<Context>& cs) {
  std::string out;
  for (Context c : cs) {
    if (!out.empty()) out += "+";
    out += to_string(c);
  }
  return out;
}

json report_to_json(const EvalReport& r) {
  json j;
  json train = json::array();
  for (Context c : r.protocol.train_contexts) train.push_back(to_string(c));
  j["train"] = train;
  j["test"] = to_string(r.protocol.test_context);
  j["feature_set"] = to_string(r.protocol.feature_set);
  j["top_k"] = r.protocol.top_k;
  j["w"] = r.protocol.w;
  j["m"] = r.protocol.m;
  j["k"] = r.protocol.k;
  j["seed"] = r.protocol.seed;
  j["mean_eer"] = r.mean_eer;
  j["std_eer"] = r.std_eer;
  json users = json::array();
  for (const auto& ue : r.per_user) {
    json u;
    u["user"] = ue.user;
    u["eer"] = ue.eer;
    u["threshold"] = ue.threshold;
    u["percentile_i"] = ue.percentile_i;
    u["n_genuine_windows"] = ue.n_genuine_windows;
    u["n_impostor_windows"] = ue.n_impostor_windows;
    users.push_back(u);
  }
  j["per_user"] = users;
  j["skipped_users"] = r.skipped_users;
  return j;
}

void write_reports_json(const std::vector<EvalReport>& reports,
                        const fs::path& path) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << arr.dump(2) << "\n";
}

// One row per (train, test) pair with the three feature-set results side by
// side, mirroring the usual result-table layout.
void write_reports_csv(const std::vector<EvalReport>& reports,
                       const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "train,test,touch_mean_eer,touch_std_eer,motion_mean_eer,"
         "motion_std_eer,fusion_mean_eer,fusion_std_eer\n";
  for (std::size_t i = 0; i + 2 < reports.size() || i + 3 == reports.size();
       i += 3) {
    const auto& t = reports[i];      // Touch
    const auto& mo = reports[i + 1]; // Motion
    const auto& f = reports[i + 2];  // Fusion
    out << context_list_string(t.protocol.train_contexts) << ","
        << to_string(t.protocol.test_context) << "," << fmt_double(t.mean_eer)
        << "," << fmt_double(t.std_eer) << "," << fmt_double(mo.mean_eer) << ","
        << fmt_double(mo.std_eer) << "," << fmt_double(f.mean_eer) << ","
        << fmt_double(f.std_eer) << "\n";
  }
}

struct DataOpts {
  std::string data;
  std::string map;
  std::string config;
};

Dataset load_dataset(const DataOpts& o) {
  return assemble_dataset(o.data, load_map(o.map));
}

int run_synth(const std::string& out, int users, int swipes,
              const std::string& contexts, double separation, double walk_noise,
              std::uint64_t seed) {
  if (out.empty()) throw InvalidConfig("synth requires --out");

  SynthConfig sc;
  sc.n_users = users;
  sc.swipes_per_session = swipes;
  auto ctx = parse_contexts(contexts);
  sc.contexts = {ctx.begin(), ctx.end()};
  sc.user_separation = separation;
  sc.walk_noise = walk_noise;
  sc.rng_seed = seed;
  auto ds = generate_synthetic(sc);
  fs::create_directories(out);
  write_dataset(ds, out);

  // output paths and worker counts stay out of the manifest so the hash
  // identifies the run's reproducible inputs only
  json manifest_cfg;
  manifest_cfg["users"] = users;
  manifest_cfg["swipes"] = swipes;
  manifest_cfg["contexts"] = contexts;
  manifest_cfg["separation"] = separation;
  manifest_cfg["walk_noise"] = walk_noise;
  manifest_cfg["seed"] = seed;
  write_manifest(fs::path(out) / "manifest.json", "synth", manifest_cfg);
  std::cerr << "wrote " << ds.users.size() << " users to " << out << "\n";
  return 0;
}

int run_catalog(const std::string& format, const std::string& out) {
  std::ostringstream body;
  if (format == "json") {
    json arr = json::array();
    for (const auto& f : feature_catalog()) {
      json e;
      e["index"] = f.index;
      e["name"] = f.name;
      e["group"] = f.group;
      e["channel"] = f.channel == Channel::Touch ? "Touch" : "Motion";
      arr.push_back(e);
    }
    json root;
    root["schema_version"] = 1;
    root["count"] = feature_catalog().size();
    root["features"] = arr;
    body << root.dump(2) << "\n";
  } else if (format == "csv") {
    body << "index,name,group,channel\n";
    for (const auto& f : feature_catalog())
      body << f.index << "," << f.name << "," << f.group << ","
           << (f.channel == Channel::Touch ? "Touch" : "Motion") << "\n";
  } else {
    throw InvalidConfig("unknown catalog format: " + format);
  }
  if (out.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream file(out);
    if (!file) throw Error("cannot write " + out);
    file << body.str();
  }
  return 0;
}

int run_segment(const DataOpts& o, const std::string& out) {
  auto ds = load_dataset(o);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw Error("cannot write " + out);
    os = &file;
  }
  for (const auto& ud : ds.users) {
    for (const auto& sd : ud.sessions) {
      auto swipes = segment_swipes(sd.touch);
      attach_motion(swipes, sd.accel);
      for (const auto& sw : swipes) {
        json line;
        line["user"] = ud.user;
        line["context"] = to_string(sd.id.context);
        line["session_index"] = sd.id.session_index;
        line["t_start"] = sw.t_start;
        line["t_end"] = sw.t_end;
        line["n_samples"] = sw.samples.size();
        line["direction"] = direction_of(sw) == DirectionClass::Vertical
                                ? "vertical"
                                : "horizontal";
        line["n_pre"] = sw.mag_pre.size();
        line["n_during"] = sw.mag_during.size();
        line["n_post"] = sw.mag_post.size();
        *os << line.dump() << "\n";
      }
    }
  }
  return 0;
}

int run_extract(const DataOpts& o, const std::string& out,
                const std::string& feature_set, const std::string& direction) {
  std::optional<DirectionClass> keep;
  if (direction == "vertical") keep = DirectionClass::Vertical;
  else if (direction == "horizontal") keep = DirectionClass::Horizontal;
  else if (direction != "all")
    throw InvalidConfig("unknown direction: " + direction);
  auto fsn = feature_set_from_string(feature_set);
  auto cols = columns_for(fsn);
  auto table = build_feature_table(load_dataset(o), keep);

  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << "user,context,session_index,t_start";
  for (int c : cols) file << "," << feature_catalog()[static_cast<std::size_t>(c)].name;
  file << "\n";
  for (const auto& row : table.rows) {
    file << row.user << "," << to_string(row.context) << "," << row.session_index
         << "," << row.t_start;
    for (int c : cols) file << "," << fmt_double(row.values[static_cast<std::size_t>(c)]);
    file << "\n";
  }
  json cfg;
  cfg["data"] = o.data;
  cfg["feature_set"] = feature_set;
  cfg["direction"] = direction;
  write_file_manifest(out, "extract", cfg);
  return 0;
}

int run_rank(const DataOpts& o, const std::string& out, const std::string& user,
             const std::string& contexts, const std::string& feature_set) {
  auto table = build_feature_table(load_dataset(o));
  auto fsn = feature_set_from_string(feature_set);
  auto cols = columns_for(fsn);
  auto train = parse_contexts(contexts);

  Matrix genuine, impostor;
  for (const auto& row : table.rows) {
    if (row.session_index > 2 ||
        std::find(train.begin(), train.end(), row.context) == train.end())
      continue;
    std::vector<double> r(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
      r[i] = row.values[static_cast<std::size_t>(cols[i])];
    (row.user == user ? genuine : impostor).push_back(std::move(r));
  }
  if (genuine.empty()) throw Error("no training swipes for user " + user);
  if (impostor.empty()) throw Error("no impostor swipes for user " + user);
  Matrix pool = genuine;
  pool.insert(pool.end(), impostor.begin(), impostor.end());
  auto nz = fit_normalizer(pool);
  auto ranked = rank_features(apply_normalizer(nz, genuine),
                              apply_normalizer(nz, impostor));

  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << "rank,feature_index,feature_name,score\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    int global = cols[static_cast<std::size_t>(ranked[i].feature)];
    file << i + 1 << "," << global << ","
         << feature_catalog()[static_cast<std::size_t>(global)].name << ","
         << fmt_double(ranked[i].score) << "\n";
  }
  json cfg;
  cfg["data"] = o.data;
  cfg["user"] = user;
  cfg["contexts"] = contexts;
  cfg["feature_set"] = feature_set;
  write_file_manifest(out, "rank", cfg);
  return 0;
}

int run_train(const DataOpts& o, const std::string& out, const std::string& user,
              const std::string& contexts, const std::string& feature_set,
              int percentile, int top_k, int k, std::uint64_t seed) {
  auto table = build_feature_table(load_dataset(o));
  Protocol p;
  p.train_contexts = parse_contexts(contexts);
  p.test_context = p.train_contexts.front();
  p.feature_set = feature_set_from_string(feature_set);
  p.top_k = top_k;
  p.k = k;
  p.seed = seed;
  auto model = train_user_model(table, user, p, percentile);
  save_model(model, out);
  json cfg;
  cfg["data"] = o.data;
  cfg["user"] = user;
  cfg["contexts"] = contexts;
  cfg["feature_set"] = feature_set;
  cfg["percentile"] = percentile;
  cfg["top_k"] = top_k;
  cfg["k"] = k;
  cfg["seed"] = seed;
  write_file_manifest(out, "train", cfg);
  std::cerr << "model for " << user << " -> " << out << "\n";
  return 0;
}

int run_score(const DataOpts& o, const std::string& model_path,
              const std::string& out, int w, int m) {
  auto model = load_model(model_path);
  auto ds = load_dataset(o);

  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << "user,context,session_index,window,statistic,decision\n";
  for (const auto& ud : ds.users) {
    for (const auto& sd : ud.sessions) {
      if (std::find(model.contexts.begin(), model.contexts.end(),
                    sd.id.context) == model.contexts.end())
        continue;
      auto swipes = segment_swipes(sd.touch);
      attach_motion(swipes, sd.accel);
      std::vector<double> scores;
      for (const auto& sw : swipes) scores.push_back(score_raw(model, extract(sw)));
      if (scores.empty()) continue;
      auto stats = stream_window_stats(scores, w, m);
      for (std::size_t i = 0; i < stats.size(); ++i) {
        file << ud.user << "," << to_string(sd.id.context) << ","
             << sd.id.session_index << "," << i << "," << fmt_double(stats[i])
             << "," << (decide_genuine(model, stats[i]) ? "genuine" : "impostor")
             << "\n";
      }
    }
  }
  json cfg;
  cfg["data"] = o.data;
  cfg["model"] = model_path;
  cfg["w"] = w;
  cfg["m"] = m;
  write_file_manifest(out, "score", cfg);
  return 0;
}

int run_eval(const DataOpts& o, const std::string& out,
             const std::string& train_contexts, const std::string& test_context,
             const std::string& feature_set, int top_k, int w, int m, int k,
             std::uint64_t seed, int workers) {
  auto table = build_feature_table(load_dataset(o));
  Protocol p;
  p.train_contexts = parse_contexts(train_contexts);
  p.test_context = context_from_string(test_context);
  p.feature_set = feature_set_from_string(feature_set);
  p.top_k = top_k;
  p.w = w;
  p.m = m;
  p.k = k;
  p.seed = seed;
  auto report = run_protocol(table, p, workers);
  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << report_to_json(report).dump(2) << "\n";
  json cfg;
  cfg["data"] = o.data;
  cfg["train_contexts"] = train_contexts;
  cfg["test_context"] = test_context;
  cfg["feature_set"] = feature_set;
  cfg["top_k"] = top_k;
  cfg["w"] = w;
  cfg["m"] = m;
  cfg["k"] = k;
  cfg["seed"] = seed;
  write_file_manifest(out, "eval", cfg);
  std::cerr << "mean EER " << report.mean_eer << " over "
            << report.per_user.size() << " users\n";
  return 0;
}

int run_experiment(const DataOpts& o, const std::string& which,
                   const std::string& out, int k, std::uint64_t seed,
                   int workers) {
  if (out.empty()) throw InvalidConfig("experiment requires --out");
  fs::create_directories(out);
  json cfg;
  cfg["data"] = o.data;
  cfg["experiment"] = which;
  cfg["k"] = k;
  cfg["seed"] = seed;

  if (which == "table1" || which == "table2") {
    auto table = build_feature_table(load_dataset(o));
    auto reports = which == "table1" ? run_table1(table, seed, k, workers)
                                     : run_table2(table, seed, k, workers);
    write_reports_json(reports, fs::path(out) / (which + ".json"));
    write_reports_csv(reports, fs::path(out) / (which + ".csv"));
  } else if (which == "ablation") {
    auto ds = load_dataset(o);
    auto [all, vertical] = run_direction_ablation(ds, seed, k, workers);
    std::vector<EvalReport> reports = {all, vertical};
    json j;
    j["all_swipes"] = report_to_json(all);
    j["vertical_only"] = report_to_json(vertical);
    std::ofstream jf(fs::path(out) / "ablation.json");
    jf << j.dump(2) << "\n";
    std::ofstream cf(fs::path(out) / "ablation.csv");
    cf << "variant,mean_eer,std_eer,n_users\n";
    cf << "all," << fmt_double(all.mean_eer) << "," << fmt_double(all.std_eer)
       << "," << all.per_user.size() << "\n";
    cf << "vertical," << fmt_double(vertical.mean_eer) << ","
       << fmt_double(vertical.std_eer) << "," << vertical.per_user.size() << "\n";
  } else {
    throw InvalidConfig("unknown experiment: " + which);
  }
  write_manifest(fs::path(out) / "manifest.json", "experiment " + which, cfg);
  return 0;
}

int run_viz_pca(const DataOpts& o, const std::string& out,
                const std::string& channel, int k, std::uint64_t seed) {
  Channel ch;
  if (channel == "touch") ch = Channel::Touch;
  else if (channel == "motion") ch = Channel::Motion;
  else throw InvalidConfig("unknown channel: " + channel);

  auto table = build_feature_table(load_dataset(o));
  std::vector<std::pair<std::string, std::vector<Context>>> groups = {
      {"sitting", {Context::S1_ReadSit, Context::S3_MapSit}},
      {"walking", {Context::S2_ReadWalk, Context::S4_MapWalk}}};
  auto pca = export_pca_gmm(table, ch, groups, k, seed);

  json j;
  j["channel"] = channel;
  j["eigval1"] = pca.eigval1;
  j["eigval2"] = pca.eigval2;
  json gs = json::array();
  for (const auto& g : pca.groups) {
    json gj;
    gj["label"] = g.label;
    json pts = json::array();
    for (const auto& p : g.points) pts.push_back({p.x, p.y});
    gj["points"] = pts;
    json comps = json::array();
    for (const auto& e : g.components) {
      json c;
      c["centroid"] = {e.centroid.x, e.centroid.y};
      c["axis1"] = {e.axis1.x, e.axis1.y};
      c["axis2"] = {e.axis2.x, e.axis2.y};
      c["len1"] = e.len1;
      c["len2"] = e.len2;
      c["weight"] = e.weight;
      comps.push_back(c);
    }
    gj["components"] = comps;
    gs.push_back(gj);
  }
  j["groups"] = gs;
  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << j.dump(2) << "\n";
  json cfg;
  cfg["data"] = o.data;
  cfg["channel"] = channel;
  cfg["k"] = k;
  cfg["seed"] = seed;
  write_file_manifest(out, "viz pca", cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swipe-gesture continuous-authentication toolkit"};
  app.require_subcommand(1);

  int exit_code = 0;

  // synth
  {
    auto* cmd = app.add_subcommand("synth", "generate a synthetic raw dataset");
    auto config = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "JSON config file (flags override keys)");
    auto out = std::make_shared<std::string>();
    auto users = std::make_shared<int>(5);
    auto swipes = std::make_shared<int>(30);
    auto contexts = std::make_shared<std::string>("all");
    auto separation = std::make_shared<double>(1.0);
    auto walk_noise = std::make_shared<double>(1.0);
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--out", *out, "output directory");
    cmd->add_option("--users", *users, "number of users");
    cmd->add_option("--swipes", *swipes, "swipes per session");
    cmd->add_option("--contexts", *contexts, "comma-separated contexts or 'all'");
    cmd->add_option("--separation", *separation, "between-user separation");
    cmd->add_option("--walk-noise", *walk_noise, "walking accelerometer noise scale");
    cmd->add_option("--seed", *seed, "master RNG seed");
    cmd->callback([=, &exit_code]() {
      apply_json_config(cmd, *config);
      require_opt(cmd, "--out");
      exit_code = run_synth(*out, *users, *swipes, *contexts, *separation,
                            *walk_noise, *seed);
    });
  }

  // catalog
  {
    auto* cmd = app.add_subcommand("catalog", "dump the frozen feature registry");
    auto config = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "JSON config file (flags override keys)");
    auto format = std::make_shared<std::string>("json");
    auto out = std::make_shared<std::string>();
    cmd->add_option("--format", *format, "json or csv");
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &exit_code]() {
      apply_json_config(cmd, *config);
      exit_code = run_catalog(*format, *out);
    });
  }

  auto add_data_opts = [](CLI::App* cmd, const std::shared_ptr<DataOpts>& o) {
    cmd->add_option("--config", o->config,
                    "JSON config file (flags override keys)");
    cmd->add_option("--data", o->data, "dataset root directory (required)");
    cmd->add_option("--map", o->map, "column-map JSON (default: synthetic layout)");
  };
  // Applies the config file, then enforces the options that must be present
  // on the command line or in the config.
  auto finish_opts = [](CLI::App* cmd, const DataOpts& o,
                        std::initializer_list<const char*> required) {
    apply_json_config(cmd, o.config);
    require_opt(cmd, "--data");
    for (const char* name : required) require_opt(cmd, name);
  };

  // segment
  {
    auto* cmd = app.add_subcommand("segment", "dump segmented swipes as JSON lines");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {});
      exit_code = run_segment(*o, *out);
    });
  }

  // extract
  {
    auto* cmd = app.add_subcommand("extract", "write the per-swipe feature matrix");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    auto feature_set = std::make_shared<std::string>("fusion");
    auto direction = std::make_shared<std::string>("all");
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "output CSV (required)");
    cmd->add_option("--feature-set", *feature_set, "touch, motion or fusion");
    cmd->add_option("--direction", *direction, "all, vertical or horizontal");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--out"});
      exit_code = run_extract(*o, *out, *feature_set, *direction);
    });
  }

  // rank
  {
    auto* cmd = app.add_subcommand("rank", "rank features for one user");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    auto user = std::make_shared<std::string>();
    auto contexts = std::make_shared<std::string>("all");
    auto feature_set = std::make_shared<std::string>("fusion");
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "output CSV (required)");
    cmd->add_option("--user", *user, "genuine user id (required)");
    cmd->add_option("--contexts", *contexts, "training contexts");
    cmd->add_option("--feature-set", *feature_set, "touch, motion or fusion");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--out", "--user"});
      exit_code = run_rank(*o, *out, *user, *contexts, *feature_set);
    });
  }

  // train
  {
    auto* cmd = app.add_subcommand("train", "train and persist one user model");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    auto user = std::make_shared<std::string>();
    auto contexts = std::make_shared<std::string>("all");
    auto feature_set = std::make_shared<std::string>("fusion");
    auto percentile = std::make_shared<int>(100);
    auto top_k = std::make_shared<int>(40);
    auto k = std::make_shared<int>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "model JSON path (required)");
    cmd->add_option("--user", *user, "genuine user id (required)");
    cmd->add_option("--contexts", *contexts, "training contexts");
    cmd->add_option("--feature-set", *feature_set, "touch, motion or fusion");
    cmd->add_option("--percentile", *percentile, "threshold percentile i")
        ->check(CLI::Range(50, 100));
    cmd->add_option("--top-k", *top_k, "ranked features kept");
    cmd->add_option("--k", *k, "mixture components per pair");
    cmd->add_option("--seed", *seed, "master RNG seed");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--out", "--user"});
      exit_code = run_train(*o, *out, *user, *contexts, *feature_set,
                            *percentile, *top_k, *k, *seed);
    });
  }

  // score
  {
    auto* cmd = app.add_subcommand("score", "score a dataset against a model");
    auto o = std::make_shared<DataOpts>();
    auto model = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto w = std::make_shared<int>(25);
    auto m = std::make_shared<int>(4);
    add_data_opts(cmd, o);
    cmd->add_option("--model", *model, "model JSON path (required)");
    cmd->add_option("--out", *out, "output CSV (required)");
    cmd->add_option("--w", *w, "window length");
    cmd->add_option("--m", *m, "smallest scores averaged per window");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--model", "--out"});
      exit_code = run_score(*o, *model, *out, *w, *m);
    });
  }

  // eval
  {
    auto* cmd = app.add_subcommand("eval", "run one train/test protocol");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    auto train_contexts = std::make_shared<std::string>();
    auto test_context = std::make_shared<std::string>();
    auto feature_set = std::make_shared<std::string>("fusion");
    auto top_k = std::make_shared<int>(40);
    auto w = std::make_shared<int>(25);
    auto m = std::make_shared<int>(4);
    auto k = std::make_shared<int>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto workers = std::make_shared<int>(1);
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "report JSON path (required)");
    cmd->add_option("--train-contexts", *train_contexts,
                    "training contexts (required)");
    cmd->add_option("--test-context", *test_context, "test context (required)");
    cmd->add_option("--feature-set", *feature_set, "touch, motion or fusion");
    cmd->add_option("--top-k", *top_k, "ranked features kept");
    cmd->add_option("--w", *w, "window length");
    cmd->add_option("--m", *m, "smallest scores averaged per window");
    cmd->add_option("--k", *k, "mixture components per pair");
    cmd->add_option("--seed", *seed, "master RNG seed");
    cmd->add_option("--workers", *workers, "parallel user evaluations");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--out", "--train-contexts", "--test-context"});
      exit_code = run_eval(*o, *out, *train_contexts, *test_context,
                           *feature_set, *top_k, *w, *m, *k, *seed, *workers);
    });
  }

  // experiment table1|table2|ablation
  {
    auto* cmd = app.add_subcommand("experiment", "run a full result table");
    auto o = std::make_shared<DataOpts>();
    auto which = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto k = std::make_shared<int>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto workers = std::make_shared<int>(1);
    cmd->add_option("which", *which, "table1, table2 or ablation")->required();
    add_data_opts(cmd, o);
    cmd->add_option("--out", *out, "output directory (required)");
    cmd->add_option("--k", *k, "mixture components per pair");
    cmd->add_option("--seed", *seed, "master RNG seed");
    cmd->add_option("--workers", *workers, "parallel user evaluations");
    cmd->callback([=, &exit_code]() {
      finish_opts(cmd, *o, {"--out"});
      exit_code = run_experiment(*o, *which, *out, *k, *seed, *workers);
    });
  }

  // viz pca
  {
    auto* cmd = app.add_subcommand("viz", "emit plot data");
    cmd->require_subcommand(1);
    auto* pca = cmd->add_subcommand("pca", "2-D PCA + mixture ellipse export");
    auto o = std::make_shared<DataOpts>();
    auto out = std::make_shared<std::string>();
    auto channel = std::make_shared<std::string>("motion");
    auto k = std::make_shared<int>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    add_data_opts(pca, o);
    pca->add_option("--out", *out, "output JSON (required)");
    pca->add_option("--channel", *channel, "touch or motion");
    pca->add_option("--k", *k, "mixture components per group");
    pca->add_option("--seed", *seed, "master RNG seed");
    pca->callback([=, &exit_code]() {
      finish_opts(pca, *o, {"--out"});
      exit_code = run_viz_pca(*o, *out, *channel, *k, *seed);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
