#include "carv/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "carv/model_io.hpp"

namespace carv {

using nlohmann::json;

std::string digest_bytes(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
    return buf;
}

json result_to_json(const VerificationResult& r) {
    json rsoas = json::array();
    for (const Rsoa& s : r.rsoas) {
        rsoas.push_back({{"t", s.t},
                         {"kind", std::string(to_string(s.kind))},
                         {"anchor_t", s.anchor_t},
                         {"lower", s.box.lower()},
                         {"upper", s.box.upper()}});
    }
    json by_h = json::array();
    for (const auto& [h, n] : r.stats.symbolic_calls_by_horizon) {
        by_h.push_back({{"horizon", h}, {"count", n}});
    }
    return {{"method", r.method},
            {"safe", r.safe},
            {"failure_time", r.failure_time ? json(*r.failure_time) : json(nullptr)},
            {"timed_out", r.timed_out},
            {"cell_count", r.cells.size()},
            {"rsoas", std::move(rsoas)},
            {"stats",
             {{"concrete_calls", r.stats.concrete_calls},
              {"symbolic_calls", r.stats.symbolic_calls()},
              {"symbolic_calls_by_horizon", std::move(by_h)},
              {"step_seconds", r.stats.step_seconds}}}};
}

namespace {

RsoaKind parse_kind(const std::string& s) {
    if (s == "initial") return RsoaKind::initial;
    if (s == "concrete") return RsoaKind::concrete;
    if (s == "symbolic") return RsoaKind::symbolic;
    throw Error("result: unknown RSOA kind '" + s + "'");
}

}  // namespace

VerificationResult result_from_json(const json& j) {
    try {
        VerificationResult r;
        r.method = j.at("method").get<std::string>();
        r.safe = j.at("safe").get<bool>();
        if (!j.at("failure_time").is_null()) r.failure_time = j["failure_time"].get<std::size_t>();
        r.timed_out = j.at("timed_out").get<bool>();
        for (const json& s : j.at("rsoas")) {
            r.rsoas.push_back(Rsoa{Box(s.at("lower").get<Vec>(), s.at("upper").get<Vec>()),
                                   s.at("t").get<std::size_t>(),
                                   parse_kind(s.at("kind").get<std::string>()),
                                   s.at("anchor_t").get<std::size_t>()});
        }
        const json& st = j.at("stats");
        r.stats.concrete_calls = st.at("concrete_calls").get<std::size_t>();
        for (const json& e : st.at("symbolic_calls_by_horizon")) {
            r.stats.symbolic_calls_by_horizon[e.at("horizon").get<std::size_t>()] =
                e.at("count").get<std::size_t>();
        }
        r.stats.step_seconds = st.at("step_seconds").get<std::vector<double>>();
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed result: ") + e.what());
    }
}

json soundness_to_json(const SoundnessReport& rep) {
    json hits = json::array();
    for (const auto& [t, i] : rep.constraint_hits) hits.push_back({t, i});
    return {{"samples", rep.samples},
            {"worst_violation", rep.worst()},
            {"max_violation", rep.max_violation},
            {"constraint_hits", std::move(hits)}};
}

json run_output_to_json(const RunOutput& out) {
    json j = {{"tool_version", out.tool_version},
              {"scenario_digest", out.scenario_digest},
              {"method", out.method},
              {"scenario", out.scenario},
              {"result", result_to_json(out.result)},
              {"soundness", out.soundness ? soundness_to_json(*out.soundness) : json(nullptr)},
              {"timing",
               {{"load_seconds", out.timing.load_seconds},
                {"verify_seconds", out.timing.verify_seconds},
                {"mc_seconds", out.timing.mc_seconds},
                {"total_seconds", out.timing.total_seconds}}}};
    return j;
}

RunOutput run_output_from_json(const json& j) {
    RunOutput out;
    try {
        out.tool_version = j.at("tool_version").get<std::string>();
        out.scenario_digest = j.at("scenario_digest").get<std::string>();
        out.method = j.at("method").get<std::string>();
        out.scenario = j.at("scenario");
        const json& t = j.at("timing");
        out.timing = {t.at("load_seconds").get<double>(), t.at("verify_seconds").get<double>(),
                      t.at("mc_seconds").get<double>(), t.at("total_seconds").get<double>()};
    } catch (const json::exception& e) {
        throw Error(std::string("malformed run output: ") + e.what());
    }
    out.result = result_from_json(j.at("result"));
    return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::ostringstream os;
    os << "parameter,method,verified,seconds,concrete_calls,symbolic_calls\n";
    char buf[64];
    for (const SweepRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%.10g", r.parameter);
        os << buf << ',' << to_string(r.method) << ',' << (r.verified ? "true" : "false") << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.seconds);
        os << buf << ',' << r.concrete_calls << ',' << r.symbolic_calls << '\n';
    }
    return os.str();
}

namespace {

std::string num(double v) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct View {
    double xmin, xmax, ymin, ymax;
};

struct Point2 {
    double x, y;
};

// Keeps the part of a convex polygon where a*x + b*y < d.
std::vector<Point2> clip_below(const std::vector<Point2>& poly, double a, double b, double d) {
    std::vector<Point2> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point2 p = poly[k];
        const Point2 q = poly[(k + 1) % poly.size()];
        const double gp = d - (a * p.x + b * p.y);
        const double gq = d - (a * q.x + b * q.y);
        if (gp > 0) out.push_back(p);
        if ((gp > 0) != (gq > 0)) {
            const double s = gp / (gp - gq);
            out.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
        }
    }
    return out;
}

const char* kind_color(RsoaKind k) {
    switch (k) {
        case RsoaKind::initial: return "#000000";
        case RsoaKind::concrete: return "#1f77b4";
        case RsoaKind::symbolic: return "#2ca02c";
    }
    return "#000000";
}

constexpr const char* kViolatingColor = "#ff7f0e";

}  // namespace

std::string render_svg(const RunOutput& out, std::size_t i, std::size_t j,
                       const std::vector<std::vector<Vec>>& trajectories) {
    const auto& rsoas = out.result.rsoas;
    if (rsoas.empty()) throw Error("plot: result holds no RSOAs");
    const std::size_t n = rsoas.front().box.dim();
    if (i >= n || j >= n || i == j) {
        throw Error("plot: invalid projection indices " + std::to_string(i) + "," +
                    std::to_string(j) + " for state dimension " + std::to_string(n));
    }
    ConstraintSet constraints;
    if (out.scenario.is_object() && out.scenario.contains("constraints")) {
        constraints = constraints_from_json(out.scenario["constraints"]);
    }

    View v{rsoas[0].box.lower()[i], rsoas[0].box.upper()[i], rsoas[0].box.lower()[j],
           rsoas[0].box.upper()[j]};
    auto grow = [&v](double x0, double x1, double y0, double y1) {
        v.xmin = std::min(v.xmin, x0);
        v.xmax = std::max(v.xmax, x1);
        v.ymin = std::min(v.ymin, y0);
        v.ymax = std::max(v.ymax, y1);
    };
    for (const Rsoa& r : rsoas) {
        grow(r.box.lower()[i], r.box.upper()[i], r.box.lower()[j], r.box.upper()[j]);
    }
    std::vector<const DiskAvoid*> disks;
    std::vector<const Halfspace*> halfspaces;
    for (const auto& item : constraints.items()) {
        if (const auto* d = std::get_if<DiskAvoid>(&item)) {
            if ((d->coords[0] == i && d->coords[1] == j) || (d->coords[0] == j && d->coords[1] == i)) {
                disks.push_back(d);
            }
        } else {
            const auto& h = std::get<Halfspace>(item);
            bool in_plane = h.normal.size() == n;
            for (std::size_t k = 0; k < h.normal.size() && in_plane; ++k) {
                if (k != i && k != j && h.normal[k] != 0.0) in_plane = false;
            }
            if (in_plane) halfspaces.push_back(&h);
        }
    }
    for (const DiskAvoid* d : disks) {
        const bool swapped = d->coords[0] == j;
        const double cx = swapped ? d->center[1] : d->center[0];
        const double cy = swapped ? d->center[0] : d->center[1];
        grow(cx - d->radius, cx + d->radius, cy - d->radius, cy + d->radius);
    }
    for (const auto& traj : trajectories) {
        for (const Vec& x : traj) grow(x[i], x[i], x[j], x[j]);
    }
    const double padx = std::max(0.05 * (v.xmax - v.xmin), 1e-3);
    const double pady = std::max(0.05 * (v.ymax - v.ymin), 1e-3);
    v = {v.xmin - padx, v.xmax + padx, v.ymin - pady, v.ymax + pady};

    constexpr double W = 640, H = 480, M = 60;
    const double s = std::min((W - 2 * M) / (v.xmax - v.xmin), (H - 2 * M) / (v.ymax - v.ymin));
    const double plot_w = s * (v.xmax - v.xmin);
    const double plot_h = s * (v.ymax - v.ymin);
    const double left = M + 0.5 * ((W - 2 * M) - plot_w);
    const double bottom = H - M - 0.5 * ((H - 2 * M) - plot_h);
    const double tx = left - s * v.xmin;
    const double ty = bottom + s * v.ymin;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << px(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"14\">"
       << out.method << ": " << (out.result.safe ? "verified safe" : "not verified") << "</text>\n";

    os << "<g id=\"data\" transform=\"matrix(" << num(s) << " 0 0 " << num(-s) << ' ' << num(tx)
       << ' ' << num(ty) << ")\">\n";

    const std::vector<Point2> view_poly = {
        {v.xmin, v.ymin}, {v.xmax, v.ymin}, {v.xmax, v.ymax}, {v.xmin, v.ymax}};
    for (const Halfspace* h : halfspaces) {
        const auto poly = clip_below(view_poly, h->normal[i], h->normal[j], h->offset);
        if (poly.size() < 3) continue;
        os << "<path class=\"halfspace\" fill=\"#999999\" fill-opacity=\"0.35\" stroke=\"none\" d=\"M";
        for (std::size_t k = 0; k < poly.size(); ++k) {
            os << (k ? " L" : "") << num(poly[k].x) << ' ' << num(poly[k].y);
        }
        os << " Z\"/>\n";
    }
    for (const DiskAvoid* d : disks) {
        const bool swapped = d->coords[0] == j;
        os << "<circle class=\"obstacle\" cx=\"" << num(swapped ? d->center[1] : d->center[0])
           << "\" cy=\"" << num(swapped ? d->center[0] : d->center[1]) << "\" r=\""
           << num(d->radius) << "\" fill=\"#999999\" fill-opacity=\"0.5\" stroke=\"#555555\" "
           << "vector-effect=\"non-scaling-stroke\"/>\n";
    }
    for (const Rsoa& r : rsoas) {
        const bool violating = !eval_box(constraints, r.box);
        const char* color = violating ? kViolatingColor : kind_color(r.kind);
        os << "<rect class=\"rsoa " << to_string(r.kind) << (violating ? " violating" : "")
           << "\" data-t=\"" << r.t << "\" x=\"" << num(r.box.lower()[i]) << "\" y=\""
           << num(r.box.lower()[j]) << "\" width=\"" << num(r.box.width(i)) << "\" height=\""
           << num(r.box.width(j)) << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.2\" vector-effect=\"non-scaling-stroke\"/>\n";
    }
    const double dot = 1.5 / s;
    for (const auto& traj : trajectories) {
        for (const Vec& x : traj) {
            os << "<circle class=\"sample\" cx=\"" << num(x[i]) << "\" cy=\"" << num(x[j])
               << "\" r=\"" << num(dot) << "\" fill=\"#000000\"/>\n";
        }
    }
    os << "</g>\n";

    // axes
    os << "<rect class=\"frame\" x=\"" << px(left) << "\" y=\"" << px(bottom - plot_h)
       << "\" width=\"" << px(plot_w) << "\" height=\"" << px(plot_h)
       << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    char label[32];
    for (int k = 0; k <= 4; ++k) {
        const double fx = v.xmin + (v.xmax - v.xmin) * k / 4.0;
        const double fy = v.ymin + (v.ymax - v.ymin) * k / 4.0;
        const double xpix = tx + s * fx;
        const double ypix = ty - s * fy;
        std::snprintf(label, sizeof label, "%.3g", std::abs(fx) < 1e-12 ? 0.0 : fx);
        os << "<line x1=\"" << px(xpix) << "\" y1=\"" << px(bottom) << "\" x2=\"" << px(xpix)
           << "\" y2=\"" << px(bottom + 5) << "\" stroke=\"#000000\"/>\n";
        os << "<text x=\"" << px(xpix) << "\" y=\"" << px(bottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label
           << "</text>\n";
        std::snprintf(label, sizeof label, "%.3g", std::abs(fy) < 1e-12 ? 0.0 : fy);
        os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(ypix) << "\" x2=\"" << px(left)
           << "\" y2=\"" << px(ypix) << "\" stroke=\"#000000\"/>\n";
        os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(ypix + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
           << "</text>\n";
    }
    os << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"" << px(H - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x[" << i
       << "]</text>\n";
    os << "<text x=\"16\" y=\"" << px(bottom - plot_h / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
          "transform=\"rotate(-90 16 "
       << px(bottom - plot_h / 2) << ")\">x[" << j << "]</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace carv
