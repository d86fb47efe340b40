#include "baw/sparams.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace baw {

namespace {

constexpr double pi = std::numbers::pi;

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

}  // namespace

reflection_spectrum read_touchstone_s1p(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file", path, 0);

    reflection_spectrum out;
    double unit = 1.0;
    enum class fmt { ri, ma, db };
    fmt format = fmt::ri;
    bool have_options = false;

    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('!'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;

        if (first == "#") {
            if (have_options) throw parse_error("duplicate option line", path, lineno);
            have_options = true;
            std::string tok;
            std::vector<std::string> toks;
            while (ls >> tok) toks.push_back(upper(tok));
            size_t i = 0;
            if (i < toks.size() &&
                (toks[i] == "HZ" || toks[i] == "KHZ" || toks[i] == "MHZ" || toks[i] == "GHZ")) {
                unit = toks[i] == "HZ" ? 1.0 : toks[i] == "KHZ" ? 1e3
                       : toks[i] == "MHZ" ? 1e6 : 1e9;
                ++i;
            }
            if (i >= toks.size() || toks[i] != "S")
                throw parse_error("option line must declare S-parameters", path, lineno);
            ++i;
            if (i >= toks.size() || (toks[i] != "RI" && toks[i] != "MA" && toks[i] != "DB"))
                throw parse_error("option line format must be RI, MA or DB", path, lineno);
            format = toks[i] == "RI" ? fmt::ri : toks[i] == "MA" ? fmt::ma : fmt::db;
            ++i;
            if (i < toks.size()) {
                if (toks[i] != "R" || i + 1 >= toks.size())
                    throw parse_error("malformed reference-impedance clause", path, lineno);
                try {
                    out.z0 = std::stod(toks[i + 1]);
                } catch (const std::exception&) {
                    throw parse_error("bad reference impedance value", path, lineno);
                }
                i += 2;
            }
            if (i != toks.size()) throw parse_error("trailing tokens on option line", path, lineno);
            continue;
        }

        std::istringstream ds(line);
        double f = 0.0, a = 0.0, b = 0.0;
        if (!(ds >> f >> a >> b)) throw parse_error("expected `freq a b` data line", path, lineno);
        double extra;
        if (ds >> extra)
            throw parse_error("more than one port's data on a line (not an .s1p)", path, lineno);

        std::complex<double> s;
        switch (format) {
            case fmt::ri: s = {a, b}; break;
            case fmt::ma: s = std::polar(a, b * pi / 180.0); break;
            case fmt::db: s = std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0); break;
        }
        const double freq = f * unit;
        if (!out.freqs.empty() && !(freq > out.freqs.back()))
            throw parse_error("frequencies must be strictly increasing", path, lineno);
        out.freqs.push_back(freq);
        out.s11.push_back(s);
    }
    if (!have_options) throw parse_error("missing option line", path, 0);
    if (out.freqs.empty()) throw parse_error("no data lines", path, lineno);
    return out;
}

impedance_spectrum read_impedance_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file", path, 0);
    impedance_spectrum out;
    std::string line;
    long lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        if (!saw_header) {
            std::string a, b, c;
            if (!(ls >> a >> b >> c) || a != "freq_hz" || b != "re_z" || c != "im_z")
                throw parse_error("expected header freq_hz,re_z,im_z", path, lineno);
            saw_header = true;
            continue;
        }
        double f, re, im;
        if (!(ls >> f >> re >> im)) throw parse_error("expected `freq,re,im` row", path, lineno);
        if (!out.freqs.empty() && !(f > out.freqs.back()))
            throw parse_error("frequencies must be strictly increasing", path, lineno);
        out.freqs.push_back(f);
        out.z.emplace_back(re, im);
    }
    if (out.freqs.empty()) throw parse_error("no data rows", path, lineno);
    return out;
}

reflection_spectrum z_to_s11(const impedance_spectrum& z, double z0) {
    if (!(z0 > 0.0)) throw argument_error("z_to_s11: z0 must be > 0");
    reflection_spectrum out;
    out.freqs = z.freqs;
    out.z0 = z0;
    out.s11.reserve(z.z.size());
    for (const auto& zi : z.z) {
        const std::complex<double> den = zi + z0;
        if (std::abs(den) == 0.0)
            throw numeric_error("z_to_s11: Z = -z0 pole");
        out.s11.push_back((zi - z0) / den);
    }
    return out;
}

impedance_spectrum s11_to_z(const reflection_spectrum& r) {
    if (!(r.z0 > 0.0)) throw argument_error("s11_to_z: z0 must be > 0");
    impedance_spectrum out;
    out.freqs = r.freqs;
    out.z.reserve(r.s11.size());
    for (const auto& s : r.s11) {
        const std::complex<double> den = 1.0 - s;
        if (std::abs(den) == 0.0)
            throw numeric_error("s11_to_z: S11 = 1 maps to infinite impedance");
        out.z.push_back(r.z0 * (1.0 + s) / den);
    }
    return out;
}

q_spectrum bode_q(const reflection_spectrum& r, int window, smoothing_kernel kernel) {
    const size_t n = r.freqs.size();
    if (n < 3 || r.s11.size() != n)
        throw argument_error("bode_q: need at least 3 consistent samples");
    if (window < 1) throw argument_error("bode_q: window must be >= 1");

    q_spectrum out;
    out.freqs = r.freqs;
    out.q.assign(n, 0.0);
    out.valid.assign(n, true);
    out.window = window;

    std::vector<double> raw(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        std::complex<double> ds;
        double dw;
        if (i == 0) {
            ds = r.s11[1] - r.s11[0];
            dw = 2.0 * pi * (r.freqs[1] - r.freqs[0]);
        } else if (i + 1 == n) {
            ds = r.s11[n - 1] - r.s11[n - 2];
            dw = 2.0 * pi * (r.freqs[n - 1] - r.freqs[n - 2]);
        } else {
            // 3-point central difference, exact for parabolas on nonuniform grids
            const double h1 = 2.0 * pi * (r.freqs[i] - r.freqs[i - 1]);
            const double h2 = 2.0 * pi * (r.freqs[i + 1] - r.freqs[i]);
            ds = (h1 * h1 * (r.s11[i + 1] - r.s11[i]) + h2 * h2 * (r.s11[i] - r.s11[i - 1])) /
                 (h1 * h2 * (h1 + h2));
            dw = 1.0;
        }
        const double w = 2.0 * pi * r.freqs[i];
        const double denom = 1.0 - std::norm(r.s11[i]);
        if (denom < 1e-9) {
            out.valid[i] = false;
            raw[i] = 0.0;
            continue;
        }
        raw[i] = w * std::abs(ds / dw) / denom;
    }

    if (window == 1) {
        out.q = raw;
        return out;
    }
    // centered moving window over valid samples only
    const int half_lo = (window - 1) / 2, half_hi = window / 2;
    std::vector<double> buf;
    for (size_t i = 0; i < n; ++i) {
        if (!out.valid[i]) continue;
        buf.clear();
        const long lo = std::max<long>(0, static_cast<long>(i) - half_lo);
        const long hi = std::min<long>(n - 1, static_cast<long>(i) + half_hi);
        for (long k = lo; k <= hi; ++k)
            if (out.valid[k]) buf.push_back(raw[k]);
        if (kernel == smoothing_kernel::mean) {
            double acc = 0.0;
            for (double v : buf) acc += v;
            out.q[i] = acc / buf.size();
        } else {
            std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
            out.q[i] = buf[buf.size() / 2];
        }
    }
    return out;
}

band_summary_result band_summary(const q_spectrum& q, double k2, double fs, double fp) {
    if (q.freqs.empty() || q.q.size() != q.freqs.size())
        throw argument_error("band_summary: empty or inconsistent spectrum");
    if (!(fs > 0.0) || !(fs <= fp)) throw argument_error("band_summary: need 0 < fs <= fp");
    if (fs < q.freqs.front() || fp > q.freqs.back())
        throw argument_error("band_summary: [fs, fp] outside the grid");

    band_summary_result out;
    // Q at the grid point nearest fs (nearest valid one)
    size_t best = q.freqs.size();
    for (size_t i = 0; i < q.freqs.size(); ++i) {
        if (!q.valid[i]) continue;
        if (best == q.freqs.size() ||
            std::abs(q.freqs[i] - fs) < std::abs(q.freqs[best] - fs))
            best = i;
    }
    if (best == q.freqs.size()) throw summary_error("band_summary: no valid samples at all");
    out.q_at_fs = q.q[best];

    bool found = false;
    for (size_t i = 0; i < q.freqs.size(); ++i) {
        if (!q.valid[i] || q.freqs[i] <= fs || q.freqs[i] >= fp) continue;
        if (!found || q.q[i] > out.q_max) {
            out.q_max = q.q[i];
            out.f_at_q_max = q.freqs[i];
            found = true;
        }
    }
    if (!found) throw summary_error("band_summary: no valid samples inside (fs, fp)");
    out.fom_max = out.q_max * k2;
    return out;
}

}  // namespace baw
