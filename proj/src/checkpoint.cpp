#include "qintent/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qintent/error.hpp"
#include "qintent/fingerprint.hpp"

namespace qintent {

namespace {

constexpr const char* kMagic = "qintent-checkpoint 1";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_num(std::string_view s, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw FormatError(std::string("checkpoint: bad ") + what + " '" + std::string(s) + "'");
  return v;
}

std::string full_spec(const ModelSpec& s) {
  std::ostringstream os;
  os << "arch=" << arch_name(s.arch) << " input_dim=" << s.input_dim << " hidden=" << s.hidden
     << " fc_hidden=" << s.fc_hidden << " cnn_maps=" << s.cnn_maps << " cnn_reduced=" << s.cnn_reduced
     << " cnn_seq_len=" << s.cnn_seq_len << " cnn_kernel_width=" << s.cnn_kernel_width
     << " seed=" << s.seed;
  return os.str();
}

ModelSpec parse_spec(const std::string& line) {
  ModelSpec s;
  std::istringstream is(line);
  std::string kv;
  while (is >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint: bad spec field '" + kv + "'");
    const std::string k = kv.substr(0, eq);
    const std::string_view v = std::string_view(kv).substr(eq + 1);
    if (k == "arch") s.arch = parse_arch(v);
    else if (k == "input_dim") s.input_dim = parse_num<std::size_t>(v, "input_dim");
    else if (k == "hidden") s.hidden = parse_num<std::size_t>(v, "hidden");
    else if (k == "fc_hidden") s.fc_hidden = parse_num<std::size_t>(v, "fc_hidden");
    else if (k == "cnn_maps") s.cnn_maps = parse_num<std::size_t>(v, "cnn_maps");
    else if (k == "cnn_reduced") s.cnn_reduced = parse_num<std::size_t>(v, "cnn_reduced");
    else if (k == "cnn_seq_len") s.cnn_seq_len = parse_num<std::size_t>(v, "cnn_seq_len");
    else if (k == "cnn_kernel_width") s.cnn_kernel_width = parse_num<std::size_t>(v, "cnn_kernel_width");
    else if (k == "seed") s.seed = parse_num<std::uint64_t>(v, "seed");
    else throw FormatError("checkpoint: unknown spec field '" + k + "'");
  }
  s.validate();
  return s;
}

}  // namespace

Checkpoint Checkpoint::capture(const IntentModel& model, std::size_t epoch,
                               std::map<std::string, double> metrics) {
  Checkpoint c;
  c.spec = model.spec();
  c.seed = model.spec().seed;
  c.epoch = epoch;
  c.metrics = std::move(metrics);
  for (const auto* p : model.parameters()) c.params.emplace_back(p->name, p->value);
  return c;
}

std::unique_ptr<IntentModel> Checkpoint::restore() const {
  auto model = build(spec);
  auto ps = model->parameters();
  if (ps.size() != params.size())
    throw FormatError("checkpoint has " + std::to_string(params.size()) + " parameters, model needs " +
                      std::to_string(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& [name, value] = params[i];
    if (name != ps[i]->name || value.shape() != ps[i]->value.shape())
      throw FormatError("checkpoint parameter '" + name + "' " + value.shape_str() +
                        " does not match '" + ps[i]->name + "' " + ps[i]->value.shape_str());
    ps[i]->value = value;
  }
  return model;
}

std::string Checkpoint::serialize() const {
  std::ostringstream os;
  os << kMagic << '\n';
  os << "spec " << full_spec(spec) << '\n';
  os << "seed " << seed << '\n';
  os << "epoch " << epoch << '\n';
  for (const auto& [k, v] : metrics) os << "metric " << k << ' ' << fmt17(v) << '\n';
  for (const auto& [name, t] : params) {
    os << "param " << name << ' ' << t.rank();
    for (auto d : t.shape()) os << ' ' << d;
    os << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << fmt17(t[i]);
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

std::string Checkpoint::hash() const { return fingerprint_of(serialize()); }

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) { out << ckpt.serialize(); }

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError("not a checkpoint (bad magic line)");
  Checkpoint c;
  bool have_spec = false, ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "spec") {
      c.spec = parse_spec(rest);
      have_spec = true;
    } else if (key == "seed") {
      c.seed = parse_num<std::uint64_t>(rest, "seed");
    } else if (key == "epoch") {
      c.epoch = parse_num<std::size_t>(rest, "epoch");
    } else if (key == "metric") {
      const auto sp2 = rest.rfind(' ');
      if (sp2 == std::string::npos) throw FormatError("checkpoint: bad metric line");
      c.metrics[rest.substr(0, sp2)] = parse_num<double>(std::string_view(rest).substr(sp2 + 1), "metric");
    } else if (key == "param") {
      std::istringstream is(rest);
      std::string name;
      std::size_t rank = 0;
      if (!(is >> name >> rank)) throw FormatError("checkpoint: bad param header");
      std::vector<std::size_t> shape(rank);
      for (auto& d : shape)
        if (!(is >> d)) throw FormatError("checkpoint: bad shape for '" + name + "'");
      std::string values;
      if (!std::getline(in, values)) throw FormatError("checkpoint: missing values for '" + name + "'");
      std::vector<double> data;
      data.reserve(nn::shape_size(shape));
      std::string_view v = values;
      while (!v.empty()) {
        const auto next = v.find(' ');
        data.push_back(parse_num<double>(v.substr(0, next), "value"));
        if (next == std::string_view::npos) break;
        v.remove_prefix(next + 1);
      }
      try {
        c.params.emplace_back(name, nn::Tensor(shape, std::move(data)));
      } catch (const ShapeError& e) {
        throw FormatError("checkpoint parameter '" + name + "': " + e.what());
      }
    } else {
      throw FormatError("checkpoint: unknown record '" + key + "'");
    }
  }
  if (!have_spec) throw FormatError("checkpoint: missing spec");
  if (!ended) throw FormatError("checkpoint: truncated (no end marker)");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp + "'");
    write_checkpoint(out, ckpt);
    if (!out.flush()) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot rename checkpoint to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace qintent
