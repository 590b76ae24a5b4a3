#include "grape/sequence_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace grape {

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError(where + ": invalid number '" + text + "'");
  }
  return v;
}

std::size_t channel_count(const ControlSequence& seq) {
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) return p->amplitudes.size() / 2;
  }
  return 0;
}

}  // namespace

void write_sequence(std::ostream& out, const ControlSequence& seq) {
  const std::size_t channels = channel_count(seq);
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s); p && p->amplitudes.size() != 2 * channels) {
      throw ConfigError("cannot write a sequence whose steps have different channel counts");
    }
  }
  if (!seq.metadata.label.empty()) out << "# label: " << seq.metadata.label << '\n';
  out << "# seed: " << seq.metadata.seed << '\n';
  if (!seq.metadata.provenance.empty()) out << "# provenance: " << seq.metadata.provenance << '\n';
  out << "kind,duration_s";
  for (std::size_t c = 0; c < channels; ++c) out << ",ch" << c << "_ux_hz,ch" << c << "_uy_hz";
  out << '\n';
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      out << "P," << format_number(p->duration_s);
      for (double a : p->amplitudes) out << ',' << format_number(rad_to_hz(a));
    } else {
      out << "D," << format_number(std::get<DelayStep>(s).duration_s);
      for (std::size_t k = 0; k < 2 * channels; ++k) out << ",0";
    }
    out << '\n';
  }
}

ControlSequence read_sequence(std::istream& in, const std::string& source) {
  ControlSequence seq;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      value.erase(0, value.find_first_not_of(' '));
      if (key == "label") seq.metadata.label = value;
      if (key == "provenance") seq.metadata.provenance = value;
      if (key == "seed") {
        try {
          seq.metadata.seed = std::stoull(value);
        } catch (const std::exception&) {
          throw ConfigError(where + ": invalid seed '" + value + "'");
        }
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "kind" || fields[1] != "duration_s" || fields.size() % 2 != 0) {
        throw ConfigError(where + ": expected header 'kind,duration_s[,chN_ux_hz,chN_uy_hz...]'");
      }
      columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      throw ConfigError(where + ": expected " + std::to_string(columns) + " fields, found " +
                        std::to_string(fields.size()));
    }
    const double duration = parse_double(fields[1], where);
    if (duration < 0.0) throw ConfigError(where + ": negative duration");
    if (fields[0] == "P") {
      PulseStep p;
      p.duration_s = duration;
      for (std::size_t k = 2; k < columns; ++k) p.amplitudes.push_back(hz_to_rad(parse_double(fields[k], where)));
      seq.steps.emplace_back(std::move(p));
    } else if (fields[0] == "D") {
      seq.steps.emplace_back(DelayStep{duration});
    } else {
      throw ConfigError(where + ": step kind must be P or D, found '" + fields[0] + "'");
    }
  }
  if (!have_header) throw ConfigError(source + ": missing header row");
  return seq;
}

void save_sequence(const std::filesystem::path& path, const ControlSequence& seq) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_sequence(out, seq);
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

ControlSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sequence file '" + path.string() + "'");
  return read_sequence(in, path.string());
}

std::pair<double, double> to_amp_phase(double ux, double uy) {
  const double amp = rad_to_hz(std::hypot(ux, uy));
  if (amp == 0.0) return {0.0, 0.0};
  double deg = std::atan2(uy, ux) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return {amp, deg};
}

void write_amp_phase(std::ostream& out, const ControlSequence& input, const AmpPhaseOptions& options) {
  const ControlSequence seq = options.quantization ? quantize(input, *options.quantization) : input;
  const std::size_t channels = channel_count(seq);
  for (std::size_t j = 0; j < seq.steps.size(); ++j) {
    if (std::holds_alternative<DelayStep>(seq.steps[j]) && !options.delays_as_zero) {
      throw ConfigError("step " + std::to_string(j) +
                        " is a delay; amp_phase export needs delays mapped to zero-amplitude rows");
    }
  }
  out << "duration_s";
  for (std::size_t c = 0; c < channels; ++c) out << ",ch" << c << "_amplitude_hz,ch" << c << "_phase_deg";
  out << '\n';
  for (const auto& s : seq.steps) {
    out << format_number(step_duration(s));
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      for (std::size_t c = 0; c < channels; ++c) {
        const auto [amp, deg] = to_amp_phase(p->amplitudes[2 * c], p->amplitudes[2 * c + 1]);
        out << ',' << format_number(amp) << ',' << format_number(deg);
      }
    } else {
      for (std::size_t c = 0; c < channels; ++c) out << ",0,0";
    }
    out << '\n';
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path.string() + "'");
  std::vector<std::vector<Complex>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream is(line);
    std::vector<double> values;
    std::string tok;
    while (is >> tok) values.push_back(parse_double(tok, path.string() + ":" + std::to_string(line_no)));
    if (values.size() % 2 != 0) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected re/im pairs");
    }
    std::vector<Complex> row;
    for (std::size_t i = 0; i < values.size(); i += 2) row.emplace_back(values[i], values[i + 1]);
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw ConfigError(path.string() + ": matrix is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace grape
