#include "oranver/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "oranver/errors.hpp"

namespace oranver {

const char *const kTraceHeader = "id,model,app_class,arrival_ms,departure_ms,node,replica,version,version_xy,"
                                 "tau_p,tau_I,tau_t,tau_s,tau_q,total,accuracy,stability";

const char *const kDecisionLogHeader = "seq,time_ms,model,kind,replica,successor,old_version,new_version,action,"
                                       "forced,node_load,state,epsilon,closed,close_time_ms,record,reward,"
                                       "next_state,q_before,max_next,q_after";

TraceNames TraceNames::from(const SimulationSetup &setup) {
  TraceNames n;
  for (const auto &m : setup.models) {
    n.models.push_back(m.id);
    n.app_classes.push_back(m.app_class);
  }
  for (const auto &node : setup.nodes)
    n.nodes.push_back(node.id);
  return n;
}

namespace {

std::size_t find_name(const std::vector<std::string> &names, const std::string &id, const char *what) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == id)
      return i;
  throw ParseError(fmt::format("unknown {} '{}'", what, id));
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template <class T> T parse_number(std::string_view s, int line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(fmt::format("line {}: cannot parse '{}'", line, s));
  return v;
}

void expect_header(std::istream &in, const char *header) {
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ParseError(fmt::format("line 1: expected header '{}'", header));
}

} // namespace

std::size_t TraceNames::model_index(const std::string &id) const { return find_name(models, id, "model"); }
std::size_t TraceNames::node_index(const std::string &id) const { return find_name(nodes, id, "node"); }

void write_trace(std::ostream &out, std::span<const RequestRecord> trace, const TraceNames &names,
                 const VersionScheme &scheme) {
  out << kTraceHeader << '\n';
  fmt::memory_buffer buf;
  for (const auto &r : trace) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.id,
                   names.models[r.model], to_string(names.app_classes[r.model]), r.arrival_ms, r.departure_ms,
                   names.nodes[r.node], r.replica, r.served_version.index(),
                   version_display(r.served_version, scheme), r.tau_p, r.tau_I, r.tau_t, r.tau_s, r.tau_q, r.total,
                   r.accuracy, r.stability);
    if (buf.size() > (1 << 16)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_trace(std::istream &in, const TraceNames &names, const std::function<void(const RequestRecord &)> &sink) {
  expect_header(in, kTraceHeader);
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    const auto f = split(line);
    if (f.size() != 17)
      throw ParseError(fmt::format("line {}: expected 17 fields, got {}", line_no, f.size()));
    RequestRecord r;
    r.id = parse_number<std::uint64_t>(f[0], line_no);
    r.model = names.model_index(std::string(f[1]));
    r.arrival_ms = parse_number<double>(f[3], line_no);
    r.departure_ms = parse_number<double>(f[4], line_no);
    r.node = names.node_index(std::string(f[5]));
    r.replica = parse_number<std::uint64_t>(f[6], line_no);
    r.served_version = VersionId{parse_number<int>(f[7], line_no)};
    r.tau_p = parse_number<double>(f[9], line_no);
    r.tau_I = parse_number<double>(f[10], line_no);
    r.tau_t = parse_number<double>(f[11], line_no);
    r.tau_s = parse_number<double>(f[12], line_no);
    r.tau_q = parse_number<double>(f[13], line_no);
    r.total = parse_number<double>(f[14], line_no);
    r.accuracy = parse_number<double>(f[15], line_no);
    r.stability = parse_number<double>(f[16], line_no);
    sink(r);
  }
}

std::vector<RequestRecord> read_trace(std::istream &in, const TraceNames &names) {
  std::vector<RequestRecord> out;
  read_trace(in, names, [&](const RequestRecord &r) { out.push_back(r); });
  return out;
}

void write_decision_log(std::ostream &out, std::span<const DecisionLogEntry> log, const TraceNames &names) {
  out << kDecisionLogHeader << '\n';
  fmt::memory_buffer buf;
  for (const auto &e : log) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{},{},", e.seq, e.time_ms,
                   names.models[e.model], e.kind == DecisionKind::update ? "update" : "spawn", e.replica,
                   e.successor, e.old_version.index(), e.new_version.index(), e.action, e.forced ? 1 : 0,
                   e.node_load, e.state, e.epsilon);
    if (e.closed)
      fmt::format_to(std::back_inserter(buf), "1,{},{},{},{},{},{},{}\n", e.close_time_ms, e.record, e.reward,
                     e.next_state, e.q.q_before, e.q.max_next, e.q.q_after);
    else
      fmt::format_to(std::back_inserter(buf), "0,,,,,,,\n");
    if (buf.size() > (1 << 16)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<DecisionLogEntry> read_decision_log(std::istream &in, const TraceNames &names) {
  expect_header(in, kDecisionLogHeader);
  std::vector<DecisionLogEntry> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    const auto f = split(line);
    if (f.size() != 21)
      throw ParseError(fmt::format("line {}: expected 21 fields, got {}", line_no, f.size()));
    DecisionLogEntry e;
    e.seq = parse_number<std::uint64_t>(f[0], line_no);
    e.time_ms = parse_number<double>(f[1], line_no);
    e.model = names.model_index(std::string(f[2]));
    if (f[3] == "update")
      e.kind = DecisionKind::update;
    else if (f[3] == "spawn")
      e.kind = DecisionKind::spawn;
    else
      throw ParseError(fmt::format("line {}: unknown decision kind '{}'", line_no, f[3]));
    e.replica = parse_number<std::uint64_t>(f[4], line_no);
    e.successor = parse_number<std::uint64_t>(f[5], line_no);
    e.old_version = VersionId{parse_number<int>(f[6], line_no)};
    e.new_version = VersionId{parse_number<int>(f[7], line_no)};
    e.action = parse_number<int>(f[8], line_no);
    e.forced = parse_number<int>(f[9], line_no) != 0;
    e.node_load = parse_number<double>(f[10], line_no);
    e.state = parse_number<std::size_t>(f[11], line_no);
    e.epsilon = parse_number<double>(f[12], line_no);
    e.closed = parse_number<int>(f[13], line_no) != 0;
    if (e.closed) {
      e.close_time_ms = parse_number<double>(f[14], line_no);
      e.record = parse_number<std::uint64_t>(f[15], line_no);
      e.reward = parse_number<double>(f[16], line_no);
      e.next_state = parse_number<std::size_t>(f[17], line_no);
      e.q.q_before = parse_number<double>(f[18], line_no);
      e.q.max_next = parse_number<double>(f[19], line_no);
      e.q.q_after = parse_number<double>(f[20], line_no);
    }
    out.push_back(e);
  }
  return out;
}

} // namespace oranver
