#include "airkit/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "airkit/mathutil.hpp"

namespace airkit {

namespace {

constexpr char kMagic[9] = "AIRBATCH";
constexpr std::uint32_t kBatchVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
  public:
    Reader(std::string data, std::string path)
        : data_(std::move(data)), path_(std::move(path)) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n)
            throw std::runtime_error(path_ + ": truncated file: needed " + std::to_string(n) +
                                     " bytes for " + what + " at byte offset " +
                                     std::to_string(pos_) + ", only " +
                                     std::to_string(remaining()) + " remain");
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i)
            v = static_cast<std::uint16_t>(v | (static_cast<std::uint16_t>(byte(i)) << (8 * i)));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(i)) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(i)) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string str(const char* what) {
        const std::uint32_t len = u32(what);
        return bytes(len, what);
    }
    const std::string& path() const { return path_; }

  private:
    unsigned char byte(int i) const {
        return static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]);
    }

    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spill(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

Constellation constellation_from_name(const std::string& name) {
    if (name == "QPSK") {
        Constellation c = build_qam(4);
        c.name = "QPSK";
        return c;
    }
    const auto pos = name.find("QAM");
    int order = 0;
    if (pos != std::string::npos && pos > 0 && pos + 3 == name.size()) {
        try {
            order = std::stoi(name.substr(0, pos));
        } catch (const std::exception&) {
            order = 0;
        }
    }
    if (order == 0) throw std::runtime_error("unknown constellation name '" + name + "'");
    return build_qam(order);
}

void write_batch(const SymbolBatch& batch, const Constellation& c, const std::string& path) {
    batch.validate(c.size_4d());
    std::string out;
    out.reserve(64 + batch.size() * 34);
    out.append(kMagic, 8);
    put_u32(out, kBatchVersion);
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(c.size_4d()));
    put_u64(out, batch.size());
    put_u64(out, batch.meta.seed);
    put_u32(out, batch.meta.batch_id);
    put_str(out, c.name);
    put_str(out, batch.meta.scenario);
    put_str(out, batch.meta.split);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        put_u16(out, batch.tx[i]);
        for (int k = 0; k < 4; ++k) put_f64(out, batch.rx[4 * i + k]);
    }
    spill(path, out);
}

LoadedBatch read_batch(const std::string& path) {
    Reader r(slurp(path), path);
    const std::string magic = r.bytes(8, "magic");
    if (std::memcmp(magic.data(), kMagic, 8) != 0)
        throw std::runtime_error(path + ": bad magic, not an airkit batch file");
    const std::uint32_t version = r.u32("version");
    if (version != kBatchVersion)
        throw std::runtime_error(path + ": unsupported batch format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kBatchVersion) + ")");
    const std::uint32_t d = r.u32("dimension");
    if (d != 4)
        throw std::runtime_error(path + ": unsupported symbol dimension " + std::to_string(d));
    const std::uint32_t m4 = r.u32("constellation size");
    const std::uint64_t n = r.u64("sample count");
    const std::uint64_t seed = r.u64("seed");
    const std::uint32_t batch_id = r.u32("batch id");
    const std::string name = r.str("constellation name");
    const std::string scenario = r.str("scenario text");
    const std::string split = r.str("split tag");

    LoadedBatch out;
    out.constellation = constellation_from_name(name);
    if (static_cast<std::uint32_t>(out.constellation.size_4d()) != m4)
        throw std::runtime_error(path + ": header says " + std::to_string(m4) +
                                 " 4D points but constellation '" + name + "' has " +
                                 std::to_string(out.constellation.size_4d()));

    const std::size_t record_size = 2 + 4 * 8;
    if (r.remaining() != n * record_size) {
        if (r.remaining() < n * record_size) {
            const std::uint64_t complete = r.remaining() / record_size;
            throw std::runtime_error(
                path + ": header promises " + std::to_string(n) + " records but only " +
                std::to_string(complete) + " complete records are present (file ends at byte " +
                std::to_string(r.offset() + r.remaining()) + ")");
        }
        throw std::runtime_error(path + ": " +
                                 std::to_string(r.remaining() - n * record_size) +
                                 " bytes of trailing data after the last record");
    }

    out.batch.meta.scenario = scenario;
    out.batch.meta.seed = seed;
    out.batch.meta.batch_id = batch_id;
    out.batch.meta.split = split;
    out.batch.tx.resize(n);
    out.batch.rx.resize(4 * n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint16_t tx = r.u16("tx index");
        if (tx >= m4)
            throw std::runtime_error(path + ": record " + std::to_string(i) + " has tx index " +
                                     std::to_string(tx) + " >= " + std::to_string(m4));
        out.batch.tx[i] = tx;
        for (int k = 0; k < 4; ++k) out.batch.rx[4 * i + k] = r.f64("rx coordinate");
    }
    out.batch.validate(static_cast<int>(m4));
    return out;
}

LoadedBatch read_batch_csv(const std::string& path, const Constellation& c) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line) || line.rfind("tx_index", 0) != 0)
        throw std::runtime_error(path + ": expected a 'tx_index,y1,y2,y3,y4' header line");
    LoadedBatch out;
    out.constellation = c;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(is, field, ',')) fields.push_back(field);
        if (fields.size() != 5)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 5 comma-separated fields");
        try {
            out.batch.tx.push_back(static_cast<std::uint16_t>(std::stoul(fields[0])));
            for (int k = 0; k < 4; ++k)
                out.batch.rx.push_back(std::stod(fields[1 + static_cast<std::size_t>(k)]));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad numeric field");
        }
    }
    out.batch.meta.scenario = "csv:" + std::filesystem::path(path).filename().string();
    out.batch.validate(c.size_4d());
    return out;
}

// --- model serialization ------------------------------------------------------

std::string model_to_text(const AuxChannelModel& model) {
    std::ostringstream os;
    const int d = model.d();
    os << "airkit-model v1\n";
    os << "kind " << model.kind().name() << "\n";
    os << "d " << d << "\n";
    os << "points_per_sub " << model.points_per_sub() << "\n";
    os << "n_sub " << model.n_sub() << "\n";
    os << "epsilon " << format_double(model.epsilon()) << "\n";
    os << "constellation " << model.constellation().name << "\n";
    const BatchMeta& meta = model.trained_on();
    os << "trained_scenario " << (meta.scenario.empty() ? "-" : meta.scenario) << "\n";
    os << "trained_seed " << meta.seed << "\n";
    os << "trained_batch " << meta.batch_id << "\n";
    os << "trained_split " << (meta.split.empty() ? "-" : meta.split) << "\n";
    for (int t = 0; t < model.n_sub(); ++t) {
        os << "sub " << t << "\n";
        const SubChannelParams& p = model.sub(t);
        if (model.kind().cov_mode == CovMode::Iid)
            os << "sigma2 " << format_double(p.sigma2) << "\n";
        for (int j = 0; j < model.points_per_sub(); ++j) {
            os << "mean " << j;
            for (int l = 0; l < d; ++l)
                os << " " << format_double(p.means[static_cast<std::size_t>(j) * d + l]);
            os << "\n";
        }
        if (model.kind().cov_mode == CovMode::Correlated) {
            for (int j = 0; j < model.points_per_sub(); ++j) {
                os << "cov " << j;
                for (int e = 0; e < d * d; ++e)
                    os << " " << format_double(p.covs[static_cast<std::size_t>(j) * d * d + e]);
                os << "\n";
            }
        }
    }
    os << "end\n";
    return os.str();
}

void write_model(const AuxChannelModel& model, const std::string& path) {
    spill(path, model_to_text(model));
}

namespace {

class LineParser {
  public:
    explicit LineParser(const std::string& text) : is_(text) {}

    // Next non-empty line, split at the first space into (key, rest).
    bool next(std::string& key, std::string& rest) {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            if (line.empty()) continue;
            const auto sp = line.find(' ');
            key = line.substr(0, sp);
            rest = sp == std::string::npos ? std::string() : line.substr(sp + 1);
            return true;
        }
        return false;
    }
    std::size_t line_no() const { return line_no_; }

  private:
    std::istringstream is_;
    std::size_t line_no_ = 0;
};

[[noreturn]] void model_error(const LineParser& p, const std::string& message) {
    throw std::runtime_error("model text line " + std::to_string(p.line_no()) + ": " + message);
}

}  // namespace

AuxChannelModel model_from_text(const std::string& text) {
    LineParser p(text);
    std::string key, rest;
    if (!p.next(key, rest) || key != "airkit-model" || rest != "v1")
        throw std::runtime_error("model text: missing 'airkit-model v1' header");

    ModelKind kind;
    int d = 0, points = 0, n_sub = 0;
    double epsilon = 0.0;
    std::string constellation_name;
    BatchMeta meta;
    bool have_kind = false;

    while (p.next(key, rest) && key != "sub") {
        if (key == "kind") {
            kind = ModelKind::parse(rest);
            have_kind = true;
        } else if (key == "d")
            d = std::stoi(rest);
        else if (key == "points_per_sub")
            points = std::stoi(rest);
        else if (key == "n_sub")
            n_sub = std::stoi(rest);
        else if (key == "epsilon")
            epsilon = std::stod(rest);
        else if (key == "constellation")
            constellation_name = rest;
        else if (key == "trained_scenario")
            meta.scenario = rest == "-" ? "" : rest;
        else if (key == "trained_seed")
            meta.seed = std::stoull(rest);
        else if (key == "trained_batch")
            meta.batch_id = static_cast<std::uint32_t>(std::stoul(rest));
        else if (key == "trained_split")
            meta.split = rest == "-" ? "" : rest;
        else
            model_error(p, "unknown header field '" + key + "'");
    }
    if (!have_kind || d == 0 || points == 0 || n_sub == 0 || constellation_name.empty())
        throw std::runtime_error("model text: incomplete header");
    if (kind.d != d) throw std::runtime_error("model text: kind/dimension mismatch");

    Constellation c = constellation_from_name(constellation_name);
    SymbolView view = make_view(c, d);
    if (view.point_count != points || view.n_sub != n_sub)
        throw std::runtime_error("model text: header sizes do not match the constellation");

    std::vector<SubChannelParams> subs(static_cast<std::size_t>(n_sub));
    int current = -1;
    if (key != "sub") throw std::runtime_error("model text: no sub-channel sections");
    do {
        if (key == "sub") {
            current = std::stoi(rest);
            if (current < 0 || current >= n_sub) model_error(p, "sub-channel index out of range");
            subs[static_cast<std::size_t>(current)].means.assign(
                static_cast<std::size_t>(points) * d, 0.0);
            if (kind.cov_mode == CovMode::Correlated)
                subs[static_cast<std::size_t>(current)].covs.assign(
                    static_cast<std::size_t>(points) * d * d, 0.0);
        } else if (key == "end") {
            break;
        } else {
            if (current < 0) model_error(p, "field before any 'sub' section");
            SubChannelParams& sp = subs[static_cast<std::size_t>(current)];
            std::istringstream fields(rest);
            if (key == "sigma2") {
                fields >> sp.sigma2;
            } else if (key == "mean") {
                int j = -1;
                fields >> j;
                if (j < 0 || j >= points) model_error(p, "mean point index out of range");
                for (int l = 0; l < d; ++l) fields >> sp.means[static_cast<std::size_t>(j) * d + l];
            } else if (key == "cov") {
                int j = -1;
                fields >> j;
                if (j < 0 || j >= points) model_error(p, "cov point index out of range");
                for (int e = 0; e < d * d; ++e)
                    fields >> sp.covs[static_cast<std::size_t>(j) * d * d + e];
            } else {
                model_error(p, "unknown field '" + key + "'");
            }
            if (fields.fail()) model_error(p, "bad numeric data in '" + key + "' line");
        }
    } while (p.next(key, rest));
    if (key != "end") throw std::runtime_error("model text: missing 'end' terminator");

    return AuxChannelModel(kind, std::move(c), std::move(view), std::move(subs), epsilon, meta);
}

AuxChannelModel read_model(const std::string& path) { return model_from_text(slurp(path)); }

// --- run configuration --------------------------------------------------------

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    RunConfig cfg;
    bool models_set = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        auto trim = [](std::string s) {
            const auto bb = s.find_first_not_of(" \t");
            if (bb == std::string::npos) return std::string();
            const auto ee = s.find_last_not_of(" \t");
            return s.substr(bb, ee - bb + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "constellation") {
                constellation_from_name(value);  // validates
                cfg.constellation = value;
            } else if (key == "scenario") {
                cfg.scenarios.push_back(ChannelScenario::parse(value));
            } else if (key == "input") {
                if (!std::filesystem::exists(value))
                    throw std::runtime_error("referenced batch file '" + value +
                                             "' does not exist");
                cfg.inputs.push_back(value);
            } else if (key == "models") {
                cfg.models.clear();
                models_set = true;
                if (value != "all") {
                    std::istringstream ms(value);
                    std::string name;
                    while (std::getline(ms, name, ','))
                        cfg.models.push_back(ModelKind::parse(trim(name)));
                }
            } else if (key == "estimators") {
                cfg.estimate_mi = false;
                cfg.estimate_gmi = false;
                std::istringstream es(value);
                std::string name;
                while (std::getline(es, name, ',')) {
                    const std::string n = trim(name);
                    if (n == "mi")
                        cfg.estimate_mi = true;
                    else if (n == "gmi")
                        cfg.estimate_gmi = true;
                    else
                        throw std::runtime_error("unknown estimator '" + n +
                                                 "' (expected mi or gmi)");
                }
            } else if (key == "gmi_means") {
                if (value != "static" && value != "adaptive" && value != "both")
                    throw std::runtime_error("gmi_means must be static, adaptive or both");
                cfg.gmi_means = value;
            } else if (key == "split_ratio") {
                cfg.split_ratio = std::stod(value);
                if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0))
                    throw std::runtime_error("split_ratio must lie in (0,1)");
            } else if (key == "split_seed") {
                cfg.split_seed = std::stoull(value);
            } else if (key == "batches") {
                cfg.batches = std::stoi(value);
                if (cfg.batches < 1) throw std::runtime_error("batches must be >= 1");
            } else if (key == "output_csv") {
                cfg.output_csv = value;
            } else {
                throw std::runtime_error("unknown configuration key '" + key + "'");
            }
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    (void)models_set;
    if (cfg.models.empty()) {
        const auto all = ModelKind::table1();
        cfg.models.assign(all.begin(), all.end());
    }
    return cfg;
}

// --- results CSV ---------------------------------------------------------------

std::string results_to_csv(std::span<const ResultRow> rows,
                           std::span<const std::string> config_echo) {
    std::ostringstream os;
    os << "# airkit results v1\n";
    for (const auto& line : config_echo) os << "# " << line << "\n";
    os << "scenario,model,estimator,mean_mode,n_train,n_eval,rate_bit_per_4d,stderr,seed\n";
    for (const auto& r : rows) {
        os << r.scenario << "," << r.model << "," << r.estimator << "," << r.mean_mode << ","
           << r.n_train << "," << r.n_eval << "," << format_double(r.rate) << ","
           << format_double(r.stderr_rate) << "," << r.seed << "\n";
    }
    return os.str();
}

void write_results_csv(std::span<const ResultRow> rows,
                       std::span<const std::string> config_echo, const std::string& path) {
    spill(path, results_to_csv(rows, config_echo));
}

}  // namespace airkit
