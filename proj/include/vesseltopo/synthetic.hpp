#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "vesseltopo/core.hpp"
#include "vesseltopo/metrics.hpp"

namespace vesseltopo {

/// Procedural vascular forest: midpoint-displaced polylines stroked with a
/// round brush. Branches are collision-checked against everything drawn so
/// far, so the raster topology (component count, junction set) is known
/// exactly at generation time and can back oracle tests.
struct SyntheticTreeSpec {
    int canvas = 256;
    int root_count = 2;
    int depth = 4;  // branching depth; 0 = bare trunks
    double angle_min_deg = 20.0, angle_max_deg = 40.0;
    double seg_len_min = 16.0, seg_len_max = 30.0;
    double width_min = 2.0, width_max = 4.0;
    double tortuosity = 2.0;  // midpoint displacement amplitude, px
    uint64_t seed = 0;

    void validate() const {
        if (canvas < 8) throw std::invalid_argument("SyntheticTreeSpec: canvas too small");
        if (root_count < 0) throw std::invalid_argument("SyntheticTreeSpec: negative root count");
        if (depth < 0) throw std::invalid_argument("SyntheticTreeSpec: negative depth");
        if (angle_max_deg < angle_min_deg || seg_len_max < seg_len_min || width_max < width_min)
            throw std::invalid_argument("SyntheticTreeSpec: empty range");
        if (width_min < 1.0) throw std::invalid_argument("SyntheticTreeSpec: widths must be >= 1");
        if (seg_len_min <= 0 || tortuosity < 0)
            throw std::invalid_argument("SyntheticTreeSpec: invalid geometry");
    }
};

/// Along-path contrast texture used when rendering images from the raster.
/// Faint windows emulate low-contrast vessel stretches; they only touch the
/// strength field, never the mask, and draw from a forked rng stream so the
/// geometry is independent of these settings.
struct ContrastProfile {
    double faint_prob = 0.4;
    double faint_lo = 0.12, faint_hi = 0.35;
    double wobble = 0.15;
};

struct TreeTopology {
    int components = 0;
    std::vector<PixelCoord> junctions;
    std::vector<std::vector<std::array<double, 2>>> polylines;  // (row, col) vertices
};

struct SyntheticMask {
    MaskGrid mask;
    Grid<float> strength;  // per-pixel stroke contrast in (0,1], 0 off-vessel
    TreeTopology topo;
};

namespace detail {

struct StrokePoint {
    double r, c, radius;
};

struct TreeState {
    SyntheticMask out;
    std::vector<StrokePoint> accepted;
    double clearance = 2.5;
};

inline bool collides(const TreeState& st, const std::vector<std::array<double, 3>>& pts,
                     double origin_r, double origin_c, double excl_radius) {
    for (const auto& p : pts) {
        const double d0 = std::hypot(p[0] - origin_r, p[1] - origin_c);
        if (d0 <= excl_radius) continue;  // attachment zone is exempt
        for (const auto& q : st.accepted) {
            const double need = p[2] + q.radius + st.clearance;
            if (std::abs(p[0] - q.r) > need || std::abs(p[1] - q.c) > need) continue;
            if (std::hypot(p[0] - q.r, p[1] - q.c) < need) return true;
        }
    }
    return false;
}

inline void stamp_disc(SyntheticMask& out, double pr, double pc, double radius, float strength) {
    const int r0 = std::max(0, static_cast<int>(std::floor(pr - radius)));
    const int r1 = std::min(out.mask.rows() - 1, static_cast<int>(std::ceil(pr + radius)));
    const int c0 = std::max(0, static_cast<int>(std::floor(pc - radius)));
    const int c1 = std::min(out.mask.cols() - 1, static_cast<int>(std::ceil(pc + radius)));
    const double r2 = radius * radius;
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            const double dr = r - pr, dc = c - pc;
            if (dr * dr + dc * dc <= r2) {
                out.mask(r, c) = 1;
                out.strength(r, c) = std::max(out.strength(r, c), strength);
            }
        }
}

inline std::vector<std::array<double, 2>> midpoint_displace(double r0, double c0, double r1,
                                                            double c1, double amp,
                                                            RngStream& rng) {
    std::vector<std::array<double, 2>> poly{{r0, c0}, {r1, c1}};
    for (int pass = 0; pass < 3 && amp > 0.05; ++pass, amp *= 0.5) {
        std::vector<std::array<double, 2>> next;
        next.reserve(poly.size() * 2);
        for (size_t i = 0; i + 1 < poly.size(); ++i) {
            const auto& a = poly[i];
            const auto& b = poly[i + 1];
            next.push_back(a);
            const double dr = b[0] - a[0], dc = b[1] - a[1];
            const double len = std::hypot(dr, dc);
            if (len < 2.0) continue;
            const double off = rng.uniform(-amp, amp);
            next.push_back({(a[0] + b[0]) / 2 - dc / len * off, (a[1] + b[1]) / 2 + dr / len * off});
        }
        next.push_back(poly.back());
        poly = std::move(next);
    }
    return poly;
}

struct Grower {
    const SyntheticTreeSpec& spec;
    const ContrastProfile& contrast;
    TreeState& st;
    RngStream& geo_rng;
    RngStream& tex_rng;
    double margin;

    bool in_bounds(double r, double c) const {
        return r >= margin && c >= margin && r <= spec.canvas - 1 - margin &&
               c <= spec.canvas - 1 - margin;
    }

    double width_at(int level) const {
        const double t = spec.depth > 0 ? static_cast<double>(level) / spec.depth : 0.0;
        return spec.width_max + (spec.width_min - spec.width_max) * t;
    }

    // Grows one segment from `pos` along `dir`; returns the end point and
    // end direction on success. Consumes texture draws unconditionally so
    // the geometry stream stays independent of acceptance.
    std::optional<std::array<double, 4>> grow_segment(double pr, double pc, double dir,
                                                      int level) {
        const double width = width_at(level);
        const double len = geo_rng.uniform(spec.seg_len_min, spec.seg_len_max);

        const bool has_faint = tex_rng.bernoulli(contrast.faint_prob);
        const double faint_t0 = tex_rng.uniform(0.25, 0.75);
        const double faint_tw = tex_rng.uniform(0.10, 0.25);
        const double faint_f = tex_rng.uniform(contrast.faint_lo, contrast.faint_hi);
        const double wob_phase = tex_rng.uniform(0.0, 2.0 * M_PI);

        for (int attempt = 0; attempt < 8; ++attempt) {
            const double jitter = attempt == 0 ? 0.0 : geo_rng.uniform(-0.45, 0.45);
            const double d = dir + jitter;
            const double er = pr + len * std::sin(d), ec = pc + len * std::cos(d);
            if (!in_bounds(er, ec)) continue;

            auto poly = midpoint_displace(pr, pc, er, ec, spec.tortuosity, geo_rng);
            bool ok = true;
            for (const auto& v : poly)
                if (!in_bounds(v[0], v[1])) ok = false;
            if (!ok) continue;

            // densify at half-pixel steps
            std::vector<std::array<double, 3>> pts;
            for (size_t i = 0; i + 1 < poly.size(); ++i) {
                const double dr = poly[i + 1][0] - poly[i][0], dc = poly[i + 1][1] - poly[i][1];
                const double seg = std::hypot(dr, dc);
                const int steps = std::max(1, static_cast<int>(std::ceil(seg / 0.5)));
                for (int s = 0; s < steps; ++s) {
                    const double t = static_cast<double>(s) / steps;
                    pts.push_back({poly[i][0] + t * dr, poly[i][1] + t * dc, width / 2.0});
                }
            }
            pts.push_back({poly.back()[0], poly.back()[1], width / 2.0});

            const double excl = width + width_at(std::max(0, level - 1)) / 2.0 + st.clearance + 1.0;
            if (collides(st, pts, pr, pc, excl)) continue;

            // accept: stroke the brush, laying down the contrast texture
            const double total = static_cast<double>(pts.size());
            for (size_t i = 0; i < pts.size(); ++i) {
                const double t = static_cast<double>(i) / total;
                double c = 1.0 - contrast.wobble * (0.5 + 0.5 * std::sin(2.0 * M_PI * (1.7 * t) + wob_phase));
                if (has_faint) {
                    const double u = std::abs(t - faint_t0) / faint_tw;
                    if (u < 1.0) c *= faint_f + (1.0 - faint_f) * u * u;  // smooth-edged dip
                }
                stamp_disc(st.out, pts[i][0], pts[i][1], pts[i][2],
                           static_cast<float>(std::clamp(c, 0.05, 1.0)));
                st.accepted.push_back({pts[i][0], pts[i][1], pts[i][2]});
            }
            st.out.topo.polylines.push_back(poly);

            const auto& pa = poly[poly.size() - 2];
            const auto& pb = poly.back();
            const double end_dir = std::atan2(pb[0] - pa[0], pb[1] - pa[1]);
            return std::array<double, 4>{pb[0], pb[1], end_dir, width};
        }
        return std::nullopt;
    }

    // recursion below a segment that was already drawn
    void grow_children_of(const std::array<double, 4>& seg, int level) {
        if (level >= spec.depth) return;
        const double er = seg[0], ec = seg[1], edir = seg[2];
        int children = 0;
        const double a1 = geo_rng.uniform(spec.angle_min_deg, spec.angle_max_deg) * M_PI / 180.0;
        const double a2 = geo_rng.uniform(spec.angle_min_deg, spec.angle_max_deg) * M_PI / 180.0;
        std::vector<std::array<double, 4>> grown;
        for (const double a : {+a1, -a2}) {
            const auto child = grow_segment(er, ec, edir + a, level + 1);
            if (child) {
                ++children;
                grown.push_back(*child);
            }
        }
        if (children >= 2)
            st.out.topo.junctions.push_back({static_cast<int>(std::lround(er)),
                                             static_cast<int>(std::lround(ec))});
        for (const auto& g : grown) grow_children_of(g, level + 1);
    }
};

}  // namespace detail

inline SyntheticMask generate_tree_mask(const SyntheticTreeSpec& spec,
                                        const ContrastProfile& contrast = {}) {
    spec.validate();
    const double margin = spec.width_max / 2.0 + 3.0;
    if (spec.root_count > 0 && spec.canvas - 2 * margin < spec.seg_len_min)
        throw std::invalid_argument("generate_tree_mask: canvas too small to fit any branch");

    detail::TreeState st;
    st.out.mask = MaskGrid(spec.canvas, spec.canvas);
    st.out.strength = Grid<float>(spec.canvas, spec.canvas, 0.0f);

    RngStream geo(spec.seed);
    RngStream tex = geo.fork(0x7e);

    detail::Grower grower{spec, contrast, st, geo, tex, margin};
    const double ctr = (spec.canvas - 1) / 2.0;

    int placed = 0;
    for (int root = 0; root < spec.root_count; ++root) {
        bool grown = false;
        for (int attempt = 0; attempt < 40 && !grown; ++attempt) {
            const double pr = geo.uniform(margin, spec.canvas - 1 - margin);
            const double pc = geo.uniform(margin, spec.canvas - 1 - margin);
            // roots must start clear of everything drawn so far
            bool clear = true;
            for (const auto& q : st.accepted)
                if (std::hypot(pr - q.r, pc - q.c) <
                    spec.width_max + q.radius + st.clearance + 2.0) {
                    clear = false;
                    break;
                }
            if (!clear) continue;
            const double toward_ctr = std::atan2(ctr - pr, ctr - pc);
            const double dir = toward_ctr + geo.uniform(-0.7, 0.7);

            const size_t polys_before = st.out.topo.polylines.size();
            const auto trunk = grower.grow_segment(pr, pc, dir, 0);
            if (!trunk) continue;
            grown = true;
            ++placed;
            (void)polys_before;
            grower.grow_children_of(*trunk, 0);
        }
    }
    if (spec.root_count > 0 && placed == 0)
        throw std::runtime_error("generate_tree_mask: could not place any branch on this canvas");
    st.out.topo.components = placed;
    return std::move(st.out);
}

/// Severs a mask at `n_breaks` sites by erasing gap-length slabs across the
/// local vessel direction. Each candidate cut is verified to raise the
/// component count by exactly one, so the result never gains more than
/// `n_breaks` components; cuts that fail verification are re-drawn elsewhere.
inline MaskGrid fragment_mask(const MaskGrid& mask, int n_breaks, int gap, RngStream& rng) {
    if (n_breaks < 0) throw std::invalid_argument("fragment_mask: negative n_breaks");
    if (gap < 1) throw std::invalid_argument("fragment_mask: gap must be >= 1");
    if (n_breaks == 0) return mask;

    bool any = false;
    for (int r = 0; r < mask.rows() && !any; ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (mask(r, c)) {
                any = true;
                break;
            }
    if (!any) throw std::invalid_argument("fragment_mask: empty mask");

    const auto skel = hard_skeletonize(mask);

    // local half-width = distance from centerline to background
    MaskGrid bg(mask.rows(), mask.cols());
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) bg(r, c) = mask(r, c) ? 0 : 1;
    const auto halfwidth = distance_transform(bg);

    std::vector<PixelCoord> candidates;
    for (const auto& p : skel.pixels) {
        bool near_junction = false;
        for (const auto& j : skel.junctions)
            if (pixel_distance(p, j) < gap + halfwidth(p.row, p.col) + 5.0) {
                near_junction = true;
                break;
            }
        if (!near_junction) candidates.push_back(p);
    }
    rng.shuffle(candidates);

    MaskGrid cur = mask;
    int base_count = component_count(mask);
    std::vector<PixelCoord> cuts;
    for (const auto& s : candidates) {
        if (static_cast<int>(cuts.size()) == n_breaks) break;
        bool far_enough = true;
        for (const auto& prev : cuts)
            if (pixel_distance(s, prev) < 2.0 * gap + 2.0 * halfwidth(s.row, s.col) + 2.0) {
                far_enough = false;
                break;
            }
        if (!far_enough) continue;

        // tangent from nearby skeleton pixels (PCA of offsets)
        double sxx = 0, sxy = 0, syy = 0;
        int n = 0;
        for (const auto& q : skel.pixels) {
            const double dr = q.row - s.row, dc = q.col - s.col;
            if (dr * dr + dc * dc > 12.25) continue;
            sxx += dr * dr;
            sxy += dr * dc;
            syy += dc * dc;
            ++n;
        }
        if (n < 3) continue;
        const double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
        const double tr = std::cos(theta), tc = std::sin(theta);

        const double h = halfwidth(s.row, s.col);
        MaskGrid trial = cur;
        const int reach = static_cast<int>(std::ceil(gap / 2.0 + h + 2.0));
        for (int r = std::max(0, s.row - reach); r <= std::min(mask.rows() - 1, s.row + reach); ++r)
            for (int c = std::max(0, s.col - reach); c <= std::min(mask.cols() - 1, s.col + reach); ++c) {
                const double dr = r - s.row, dc = c - s.col;
                const double along = std::abs(dr * tr + dc * tc);
                const double across = std::abs(-dr * tc + dc * tr);
                if (along <= gap / 2.0 && across <= h + 1.5) trial(r, c) = 0;
            }
        if (component_count(trial) == base_count + static_cast<int>(cuts.size()) + 1) {
            cur = std::move(trial);
            cuts.push_back(s);
        }
    }
    return cur;
}

}  // namespace vesseltopo
