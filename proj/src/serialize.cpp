#include "evogen/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace evogen {

using nlohmann::json;

namespace {

json kernel_json(const MigrationKernel& kernel) {
  return json{{"d", kernel.d}, {"offsets", kernel.offsets}, {"probs", kernel.probs}};
}

MigrationKernel kernel_from(const json& j) {
  MigrationKernel k;
  k.d = j.at("d").get<int>();
  k.offsets = j.at("offsets").get<std::vector<std::vector<int>>>();
  k.probs = j.at("probs").get<std::vector<double>>();
  k.validate();
  return k;
}

json time_json(const EventTime& t) { return json{{"t", t.t}, {"tick", t.tick}}; }

EventTime time_from(const json& j) {
  return {j.at("t").get<double>(), j.at("tick").get<std::uint64_t>()};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

std::string kernel_to_json(const MigrationKernel& kernel) {
  return kernel_json(kernel).dump();
}

MigrationKernel kernel_from_json(const std::string& text) {
  return kernel_from(json::parse(text));
}

std::string umm_to_json(const AtomicUmm& u) {
  // Leaves and merges in node-index order; merge children reference either
  // list by ordinal, so the builder can replay them in order.
  std::vector<int> ordinal(u.node_count(), -1);
  json leaves = json::array();
  json merges = json::array();
  for (int i = 0; i < u.node_count(); ++i) {
    const auto& nd = u.node(i);
    if (nd.children.empty()) {
      ordinal[i] = int(leaves.size());
      json leaf{{"id", nd.leaf_id}, {"mass", nd.mass}};
      if (!nd.marks.empty()) {
        json marks = json::array();
        for (auto& [site, g] : nd.marks) marks.push_back(json::array({site, g}));
        leaf["marks"] = std::move(marks);
      }
      leaves.push_back(std::move(leaf));
    } else {
      ordinal[i] = int(merges.size());
      json children = json::array();
      for (int c : nd.children)
        children.push_back(json{{"type", u.node(c).children.empty() ? "leaf" : "merge"},
                                {"index", ordinal[c]}});
      merges.push_back(json{{"height", time_json(nd.height)},
                            {"children", std::move(children)}});
    }
  }
  return json{{"leaves", std::move(leaves)}, {"merges", std::move(merges)}}.dump();
}

AtomicUmm umm_from_json(const std::string& text) {
  const json j = json::parse(text);
  UmmBuilder b;
  std::vector<int> leaf_idx;
  for (const json& leaf : j.at("leaves")) {
    MarkVector marks;
    if (leaf.contains("marks"))
      for (const json& m : leaf.at("marks"))
        marks.push_back({m.at(0).get<int>(), m.at(1).get<double>()});
    leaf_idx.push_back(b.add_leaf(leaf.at("id").get<std::uint64_t>(),
                                  leaf.at("mass").get<double>(), std::move(marks)));
  }
  std::vector<int> merge_idx;
  for (const json& merge : j.at("merges")) {
    std::vector<int> children;
    for (const json& c : merge.at("children")) {
      const int idx = c.at("index").get<int>();
      children.push_back(c.at("type").get<std::string>() == "leaf" ? leaf_idx.at(idx)
                                                                   : merge_idx.at(idx));
    }
    merge_idx.push_back(b.merge(children, time_from(merge.at("height"))));
  }
  return b.build();
}

std::string event_log_to_jsonl(const EventLog& log) {
  std::ostringstream out;
  json meta{{"kind", "moran_log"},
            {"d", log.config.torus.d},
            {"half_width", log.config.torus.half_width},
            {"n_per_site", log.config.n_per_site},
            {"gamma", log.config.gamma},
            {"t_max", log.config.t_max},
            {"seed", log.config.seed},
            {"max_events", log.config.max_events},
            {"placement",
             log.config.placement == MoranConfig::Placement::origin ? "origin" : "uniform"},
            {"kernel", kernel_json(log.config.kernel)},
            {"initial_sites", log.initial_sites},
            {"t_end", log.t_end},
            {"total_events", log.total_events},
            {"truncated", log.truncated}};
  out << meta.dump() << '\n';
  for (const ResamplingEvent& e : log.resampling)
    out << json{{"type", "res"}, {"t", e.t}, {"tick", e.tick}, {"src", e.src}, {"dst", e.dst}}
               .dump()
        << '\n';
  for (const MigrationEvent& e : log.migration)
    out << json{{"type", "mig"}, {"t", e.t},    {"tick", e.tick},
                {"ind", e.ind},  {"from", e.from}, {"to", e.to}}
               .dump()
        << '\n';
  return out.str();
}

EventLog event_log_from_jsonl(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::invalid_argument("event log: empty stream");
  const json meta = json::parse(lines.front());
  if (meta.at("kind") != "moran_log") throw std::invalid_argument("event log: wrong kind");

  EventLog log;
  log.config.torus = {meta.at("d").get<int>(), meta.at("half_width").get<int>()};
  log.config.n_per_site = meta.at("n_per_site").get<int>();
  log.config.gamma = meta.at("gamma").get<double>();
  log.config.t_max = meta.at("t_max").get<double>();
  log.config.seed = meta.at("seed").get<std::uint64_t>();
  log.config.max_events = meta.at("max_events").get<std::uint64_t>();
  log.config.placement = meta.at("placement") == "origin" ? MoranConfig::Placement::origin
                                                          : MoranConfig::Placement::uniform;
  log.config.kernel = kernel_from(meta.at("kernel"));
  log.initial_sites = meta.at("initial_sites").get<std::vector<int>>();
  log.t_end = meta.at("t_end").get<double>();
  log.total_events = meta.at("total_events").get<std::uint64_t>();
  log.truncated = meta.at("truncated").get<bool>();

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json j = json::parse(lines[i]);
    if (j.at("type") == "res") {
      log.resampling.push_back({j.at("t").get<double>(), j.at("tick").get<std::uint64_t>(),
                                j.at("src").get<std::int32_t>(),
                                j.at("dst").get<std::int32_t>()});
    } else {
      log.migration.push_back({j.at("t").get<double>(), j.at("tick").get<std::uint64_t>(),
                               j.at("ind").get<std::int32_t>(),
                               j.at("from").get<std::int32_t>(),
                               j.at("to").get<std::int32_t>()});
    }
  }
  return log;
}

std::string coalescent_to_jsonl(const CoalescentPath& path) {
  std::ostringstream out;
  out << json{{"kind", "coalescent_path"},
              {"n", path.n},
              {"horizon", path.horizon},
              {"blocks", path.initial.blocks},
              {"labels", path.initial.labels}}
             .dump()
      << '\n';
  for (const CoalescentEvent& e : path.events) {
    json j{{"time", time_json(e.time)}};
    if (e.kind == CoalescentEvent::Kind::merge) {
      j["type"] = "merge";
      j["a"] = e.a;
      j["b"] = e.b;
    } else {
      j["type"] = "relabel";
      j["a"] = e.a;
      j["label"] = e.new_label;
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

CoalescentPath coalescent_from_jsonl(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::invalid_argument("coalescent path: empty stream");
  const json meta = json::parse(lines.front());
  if (meta.at("kind") != "coalescent_path")
    throw std::invalid_argument("coalescent path: wrong kind");

  CoalescentPath path;
  path.n = meta.at("n").get<int>();
  path.horizon = meta.at("horizon").get<double>();
  path.initial.n = path.n;
  path.initial.blocks = meta.at("blocks").get<std::vector<std::vector<int>>>();
  path.initial.labels = meta.at("labels").get<std::vector<int>>();

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json j = json::parse(lines[i]);
    CoalescentEvent e;
    e.time = time_from(j.at("time"));
    if (j.at("type") == "merge") {
      e.kind = CoalescentEvent::Kind::merge;
      e.a = j.at("a").get<int>();
      e.b = j.at("b").get<int>();
    } else {
      e.kind = CoalescentEvent::Kind::relabel;
      e.a = j.at("a").get<int>();
      e.new_label = j.at("label").get<int>();
    }
    path.events.push_back(e);
  }
  return path;
}

std::string measure_path_to_jsonl(const AtomicMeasurePath& path) {
  std::ostringstream out;
  out << json{{"kind", "measure_path"},
              {"T", path.T},
              {"t_end", path.t_end},
              {"n", path.n},
              {"n_sites", path.n_sites},
              {"label_seed", path.label_seed}}
             .dump()
      << '\n';
  for (const MeasureSnapshot& snap : path.snaps) {
    json atoms = json::array();
    for (const MeasureAtom& a : snap.atoms) {
      json sites = json::array();
      for (auto& [site, c] : a.site_counts) sites.push_back(json::array({site, c}));
      atoms.push_back(json{{"label", a.label},
                           {"rep", a.representative},
                           {"members", a.members},
                           {"sites", std::move(sites)}});
    }
    out << json{{"h", time_json(snap.h)},
                {"occupancy", snap.occupancy},
                {"atoms", std::move(atoms)}}
               .dump()
        << '\n';
  }
  return out.str();
}

AtomicMeasurePath measure_path_from_jsonl(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::invalid_argument("measure path: empty stream");
  const json meta = json::parse(lines.front());
  if (meta.at("kind") != "measure_path")
    throw std::invalid_argument("measure path: wrong kind");

  AtomicMeasurePath path;
  path.T = meta.at("T").get<double>();
  path.t_end = meta.at("t_end").get<double>();
  path.n = meta.at("n").get<int>();
  path.n_sites = meta.at("n_sites").get<int>();
  path.label_seed = meta.at("label_seed").get<std::uint64_t>();

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json j = json::parse(lines[i]);
    MeasureSnapshot snap;
    snap.h = time_from(j.at("h"));
    snap.occupancy = j.at("occupancy").get<std::vector<int>>();
    for (const json& aj : j.at("atoms")) {
      MeasureAtom a;
      a.label = aj.at("label").get<std::uint64_t>();
      a.representative = aj.at("rep").get<int>();
      a.members = aj.at("members").get<std::vector<int>>();
      for (const json& s : aj.at("sites"))
        a.site_counts.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
      snap.atoms.push_back(std::move(a));
    }
    path.snaps.push_back(std::move(snap));
  }
  return path;
}

std::string csv_table(std::uint64_t seed, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out << "# seed=" << seed << '\n';
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "");
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << buf << (i + 1 < row.size() ? "," : "");
    }
    out << '\n';
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace evogen
