#include "acep/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace acep {

double Schedule::at(Timestamp t) const {
  if (points.empty()) return 0;
  if (t <= points.front().at) return points.front().value;
  for (size_t i = 1; i < points.size(); ++i) {
    if (t >= points[i].at) continue;
    if (!ramp) return points[i - 1].value;
    double span = static_cast<double>(points[i].at - points[i - 1].at);
    double frac = static_cast<double>(t - points[i - 1].at) / span;
    return points[i - 1].value + frac * (points[i].value - points[i - 1].value);
  }
  return points.back().value;
}

double Schedule::max_value() const {
  double m = 0;
  for (const auto& p : points) m = std::max(m, p.value);
  return m;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

Schedule parse_schedule(const std::vector<std::string>& words, size_t from, int lineno) {
  Schedule sched;
  size_t i = from;
  if (i < words.size() && words[i] == "ramp") {
    sched.ramp = true;
    ++i;
  }
  for (; i < words.size(); ++i) {
    size_t colon = words[i].find(':');
    if (colon == std::string::npos)
      throw Error("script line " + std::to_string(lineno) + ": expected <t>:<value>, got '" +
                  words[i] + "'");
    Schedule::Point p;
    try {
      p.at = std::stoll(words[i].substr(0, colon));
      p.value = std::stod(words[i].substr(colon + 1));
    } catch (const std::exception&) {
      throw Error("script line " + std::to_string(lineno) + ": malformed point '" + words[i] + "'");
    }
    if (!sched.points.empty() && p.at <= sched.points.back().at)
      throw Error("script line " + std::to_string(lineno) + ": schedule not time-sorted");
    sched.points.push_back(p);
  }
  if (sched.points.empty())
    throw Error("script line " + std::to_string(lineno) + ": schedule needs at least one point");
  return sched;
}

std::string render_schedule(const Schedule& s) {
  std::string out;
  if (s.ramp) out += " ramp";
  char buf[64];
  for (const auto& p : s.points) {
    std::snprintf(buf, sizeof buf, " %lld:%g", static_cast<long long>(p.at), p.value);
    out += buf;
  }
  return out;
}

}  // namespace

DriftScript DriftScript::parse(const std::string& text) {
  DriftScript s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_duration = false;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;
    const std::string& key = words[0];
    if (key == "seed") {
      if (words.size() != 2) throw Error("script line " + std::to_string(lineno) + ": seed <n>");
      s.seed = std::stoull(words[1]);
    } else if (key == "duration") {
      if (words.size() != 2)
        throw Error("script line " + std::to_string(lineno) + ": duration <ms>");
      s.duration_ms = std::stoll(words[1]);
      have_duration = true;
    } else if (key == "rate") {
      if (words.size() < 3)
        throw Error("script line " + std::to_string(lineno) + ": rate <Type> [ramp] <t>:<v> ...");
      RateLine r;
      r.type = words[1];
      r.sched = parse_schedule(words, 2, lineno);
      for (const auto& p : r.sched.points)
        if (p.value < 0)
          throw Error("script line " + std::to_string(lineno) + ": negative rate");
      for (const auto& other : s.rates)
        if (other.type == r.type)
          throw Error("script line " + std::to_string(lineno) + ": duplicate rate for " + r.type);
      s.rates.push_back(std::move(r));
    } else if (key == "sel") {
      if (words.size() < 5)
        throw Error("script line " + std::to_string(lineno) +
                    ": sel <attr> <TypeA> <TypeB> [ramp] <t>:<v> ...");
      SelLine l;
      l.attr = words[1];
      l.type_a = words[2];
      l.type_b = words[3];
      l.sched = parse_schedule(words, 4, lineno);
      for (const auto& p : l.sched.points)
        if (p.value < 0 || p.value > 1)
          throw Error("script line " + std::to_string(lineno) + ": selectivity outside [0,1]");
      s.sels.push_back(std::move(l));
    } else {
      throw Error("script line " + std::to_string(lineno) + ": unknown directive '" + key + "'");
    }
  }
  if (!have_duration || s.duration_ms <= 0) throw Error("script: missing positive duration");
  if (s.rates.empty()) throw Error("script: no rate lines");
  return s;
}

std::string DriftScript::render() const {
  std::string out = "seed " + std::to_string(seed) + "\n";
  out += "duration " + std::to_string(duration_ms) + "\n";
  for (const auto& r : rates) out += "rate " + r.type + render_schedule(r.sched) + "\n";
  for (const auto& l : sels)
    out += "sel " + l.attr + " " + l.type_a + " " + l.type_b + render_schedule(l.sched) + "\n";
  return out;
}

DriftScript DriftScript::preset(const std::string& name) {
  if (name == "traffic-like") {
    // Skewed rates with one large step: halfway through, C overtakes B and
    // the best order flips.
    return parse(
        "seed 7\n"
        "duration 240000\n"
        "rate A 0:100\n"
        "rate B 0:15\n"
        "rate C 0:10 120000:40\n"
        "sel x A B 0:0.4\n"
        "sel y B C 0:0.5 120000:0.3\n");
  }
  if (name == "stocks-like") {
    // Even rates with frequent minor jitters that never change the plan.
    std::string script =
        "seed 11\n"
        "duration 240000\n";
    const char* types[] = {"A", "B", "C", "D", "E", "F"};
    double base[] = {20, 22, 24, 26, 28, 30};
    for (int t = 0; t < 6; ++t) {
      script += "rate " + std::string(types[t]);
      std::uint64_t h = 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(t + 1);
      for (int k = 0; k < 24; ++k) {
        h = h * 6364136223846793005ull + 1442695040888963407ull;
        double jitter = 1.0 + 0.06 * (static_cast<double>(h % 2001) / 1000.0 - 1.0);
        script += " " + std::to_string(k * 10000) + ":" + std::to_string(base[t] * jitter);
      }
      script += "\n";
    }
    return parse(script);
  }
  throw Error("unknown preset '" + name + "' (expected traffic-like or stocks-like)");
}

NamedStream generate(const DriftScript& script) {
  NamedStream out;
  for (const auto& r : script.rates) out.names.push_back(r.type);

  // Each pair-selectivity line works through one shared attribute: with
  // target s <= 1/2 draw a ~ U[0,1] and b ~ U[0,2s], giving P(a<b) = s; for
  // s > 1/2 draw a ~ U[0,2(1-s)] and b ~ U[0,1].
  std::mt19937_64 rng(script.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Event> events;
  for (size_t t = 0; t < script.rates.size(); ++t) {
    const Schedule& sched = script.rates[t].sched;
    double lmax = sched.max_value();
    if (lmax <= 0) continue;
    double now_ms = 0;
    for (;;) {
      double u = uni(rng);
      now_ms += -std::log(1.0 - u) / lmax * 1000.0;
      if (now_ms >= static_cast<double>(script.duration_ms)) break;
      Timestamp ts = static_cast<Timestamp>(now_ms);
      if (uni(rng) * lmax > sched.at(ts)) continue;  // thinning
      Event e;
      e.type = static_cast<TypeId>(t);
      e.ts = ts;
      for (const auto& l : script.sels) {
        bool is_a = l.type_a == script.rates[t].type;
        bool is_b = l.type_b == script.rates[t].type;
        if (!is_a && !is_b) continue;
        double s = l.sched.at(ts);
        double hi;
        if (is_a)
          hi = s <= 0.5 ? 1.0 : 2.0 * (1.0 - s);
        else
          hi = s <= 0.5 ? 2.0 * s : 1.0;
        e.attrs.emplace_back(l.attr, uni(rng) * hi);
      }
      events.push_back(std::move(e));
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.type < b.type;
  });
  for (size_t i = 0; i < events.size(); ++i) events[i].seq = i + 1;
  out.events = std::move(events);
  return out;
}

std::vector<Event> bind_stream(const NamedStream& stream, const Pattern& p) {
  std::vector<TypeId> remap(stream.names.size(), -1);
  for (size_t i = 0; i < stream.names.size(); ++i) remap[i] = p.type_by_name(stream.names[i]);
  std::vector<Event> out;
  out.reserve(stream.events.size());
  for (const Event& e : stream.events) {
    TypeId id = remap[static_cast<size_t>(e.type)];
    if (id < 0) continue;
    Event copy = e;
    copy.type = id;
    copy.seq = out.size() + 1;
    out.push_back(std::move(copy));
  }
  return out;
}

std::string events_to_csv(const NamedStream& stream) {
  std::string out;
  char buf[64];
  for (const Event& e : stream.events) {
    std::snprintf(buf, sizeof buf, "%lld,", static_cast<long long>(e.ts));
    out += buf;
    out += stream.names.at(static_cast<size_t>(e.type));
    if (!e.attrs.empty()) {
      out += ",";
      for (size_t i = 0; i < e.attrs.size(); ++i) {
        if (i) out += ";";
        std::snprintf(buf, sizeof buf, "=%.17g", e.attrs[i].second);
        out += e.attrs[i].first + buf;
      }
    }
    out += "\n";
  }
  return out;
}

NamedStream ingest_csv(const std::string& text) {
  NamedStream out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Timestamp last_ts = -1;
  auto fail = [&](const std::string& msg) {
    throw Error("event CSV line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    if (c1 == std::string::npos) fail("expected 'timestamp_ms,type_name[,attrs]'");
    size_t c2 = line.find(',', c1 + 1);
    Event e;
    try {
      e.ts = std::stoll(line.substr(0, c1));
    } catch (const std::exception&) {
      fail("malformed timestamp '" + line.substr(0, c1) + "'");
    }
    if (e.ts < last_ts) fail("timestamps must be nondecreasing");
    last_ts = e.ts;
    std::string name = line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    if (name.empty()) fail("empty type name");
    TypeId id = -1;
    for (size_t i = 0; i < out.names.size(); ++i)
      if (out.names[i] == name) id = static_cast<TypeId>(i);
    if (id < 0) {
      id = static_cast<TypeId>(out.names.size());
      out.names.push_back(name);
    }
    e.type = id;
    if (c2 != std::string::npos) {
      std::string attrs = line.substr(c2 + 1);
      size_t pos = 0;
      while (pos < attrs.size()) {
        size_t semi = attrs.find(';', pos);
        std::string item = attrs.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
        pos = semi == std::string::npos ? attrs.size() : semi + 1;
        if (item.empty()) continue;
        size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) fail("malformed attribute '" + item + "'");
        try {
          e.attrs.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
        } catch (const std::exception&) {
          fail("malformed attribute value in '" + item + "'");
        }
      }
    }
    e.seq = out.events.size() + 1;
    out.events.push_back(std::move(e));
  }
  return out;
}

std::string match_to_csv(const Match& m) {
  std::string out = std::to_string(m.detected_at);
  for (const auto& binding : m.bindings) {
    if (binding.empty()) continue;  // negated positions are unbound
    out += ",";
    for (size_t i = 0; i < binding.size(); ++i) {
      if (i) out += ";";
      out += std::to_string(binding[i].ts);
    }
  }
  return out + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace acep
