#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "vesseltopo/core.hpp"

#include <json.hpp>

namespace vesseltopo {

// 8-neighbourhood offsets, clockwise from north (Zhang-Suen P2..P9 order).
inline constexpr int kN8r[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
inline constexpr int kN8c[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline MaskGrid binarize(const Grid<float>& probs, double threshold = 0.5) {
    MaskGrid out(probs.rows(), probs.cols());
    for (int r = 0; r < probs.rows(); ++r)
        for (int c = 0; c < probs.cols(); ++c)
            out(r, c) = probs(r, c) >= threshold ? 1 : 0;
    return out;
}

inline MaskGrid binarize(const torch::Tensor& probs, double threshold = 0.5) {
    return binarize(tensor_to_grid_f(probs), threshold);
}

// ---- connected components (8-connectivity) --------------------------------

struct ComponentLabels {
    Grid<int32_t> labels;  // 0 = background, components numbered from 1
    int count = 0;
};

/// Two-pass union-find labelling. The test suite cross-checks this against a
/// plain flood-fill oracle, so keep the two implementations structurally
/// different.
inline ComponentLabels label_components(const MaskGrid& mask) {
    const int R = mask.rows(), C = mask.cols();
    ComponentLabels out{Grid<int32_t>(R, C, 0), 0};
    if (R == 0 || C == 0) return out;

    std::vector<int32_t> parent(1, 0);
    auto find = [&](int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](int32_t a, int32_t b) {
        a = find(a); b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // Pass 1: provisional labels, merging across the four already-seen neighbours.
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            if (!mask(r, c)) continue;
            int32_t lbl = 0;
            const int pr[4] = {r, r - 1, r - 1, r - 1};
            const int pc[4] = {c - 1, c - 1, c, c + 1};
            for (int k = 0; k < 4; ++k) {
                if (!mask.inside(pr[k], pc[k])) continue;
                const int32_t nl = out.labels(pr[k], pc[k]);
                if (nl == 0) continue;
                if (lbl == 0) lbl = nl;
                else unite(lbl, nl);
            }
            if (lbl == 0) {
                lbl = static_cast<int32_t>(parent.size());
                parent.push_back(lbl);
            }
            out.labels(r, c) = lbl;
        }
    }
    // Pass 2: flatten and renumber densely.
    std::vector<int32_t> dense(parent.size(), 0);
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            int32_t lbl = out.labels(r, c);
            if (!lbl) continue;
            lbl = find(lbl);
            if (!dense[lbl]) dense[lbl] = ++out.count;
            out.labels(r, c) = dense[lbl];
        }
    }
    return out;
}

inline int component_count(const MaskGrid& mask) { return label_components(mask).count; }

inline void check_same_shape(const MaskGrid& a, const MaskGrid& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

inline int betti0_error(const MaskGrid& pred, const MaskGrid& gt) {
    check_same_shape(pred, gt, "betti0_error");
    return std::abs(component_count(pred) - component_count(gt));
}

// ---- overlap metrics -------------------------------------------------------

inline std::pair<double, double> dice_iou(const MaskGrid& pred, const MaskGrid& gt,
                                          double eps = 1e-9) {
    check_same_shape(pred, gt, "dice_iou");
    double inter = 0, np = 0, ng = 0;
    for (int r = 0; r < pred.rows(); ++r)
        for (int c = 0; c < pred.cols(); ++c) {
            const bool p = pred(r, c), g = gt(r, c);
            inter += p && g;
            np += p;
            ng += g;
        }
    const double dice = (2.0 * inter + eps) / (np + ng + eps);
    const double iou = (inter + eps) / (np + ng - inter + eps);
    return {dice, iou};
}

// ---- exact Euclidean distance transform (Felzenszwalb-Huttenlocher) -------

namespace detail {

inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (f[v[k]] == kInf) {  // no finite site yet
            v[k] = q;
            continue;
        }
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (k > 0 && s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = f[v[k]] == kInf ? kInf : dq * dq + f[v[k]];
    }
}

}  // namespace detail

/// Squared-exact Euclidean distance (in pixels) from every cell to the nearest
/// nonzero cell of `sites`; +inf when `sites` is empty.
inline Grid<double> distance_transform(const MaskGrid& sites) {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    const int R = sites.rows(), C = sites.cols();
    Grid<double> sq(R, C, kInf);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (sites(r, c)) sq(r, c) = 0.0;

    std::vector<double> f(std::max(R, C)), d(std::max(R, C));
    for (int c = 0; c < C; ++c) {  // columns
        for (int r = 0; r < R; ++r) f[r] = sq(r, c);
        detail::edt_1d(f, d, R);
        for (int r = 0; r < R; ++r) sq(r, c) = d[r];
    }
    for (int r = 0; r < R; ++r) {  // rows
        for (int c = 0; c < C; ++c) f[c] = sq(r, c);
        detail::edt_1d(f, d, C);
        for (int c = 0; c < C; ++c) sq(r, c) = d[c];
    }
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (sq(r, c) != kInf) sq(r, c) = std::sqrt(sq(r, c));
    return sq;
}

/// Foreground pixels with at least one background 4-neighbour; pixels beyond
/// the image border count as background.
inline std::vector<PixelCoord> boundary_pixels(const MaskGrid& m) {
    std::vector<PixelCoord> out;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            if (!m(r, c)) continue;
            if (!m.at_or(r - 1, c, 0) || !m.at_or(r + 1, c, 0) ||
                !m.at_or(r, c - 1, 0) || !m.at_or(r, c + 1, 0))
                out.push_back({r, c});
        }
    return out;
}

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(v.begin(), v.end());
    const double rank = q * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(rank));
    if (lo + 1 >= v.size()) return v.back();
    const double frac = rank - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

/// 95th percentile of the pooled symmetric boundary distances. Empty-vs-empty
/// is 0; exactly one empty mask yields the image diagonal as a finite,
/// order-preserving sentinel.
inline double hd95(const MaskGrid& pred, const MaskGrid& gt) {
    check_same_shape(pred, gt, "hd95");
    const auto bp = boundary_pixels(pred);
    const auto bg = boundary_pixels(gt);
    if (bp.empty() && bg.empty()) return 0.0;
    if (bp.empty() || bg.empty())
        return std::hypot(static_cast<double>(pred.rows()), static_cast<double>(pred.cols()));

    MaskGrid sp(pred.rows(), pred.cols()), sg(pred.rows(), pred.cols());
    for (const auto& p : bp) sp(p.row, p.col) = 1;
    for (const auto& p : bg) sg(p.row, p.col) = 1;
    const auto dist_to_gt = distance_transform(sg);
    const auto dist_to_pred = distance_transform(sp);

    std::vector<double> pooled;
    pooled.reserve(bp.size() + bg.size());
    for (const auto& p : bp) pooled.push_back(dist_to_gt(p.row, p.col));
    for (const auto& p : bg) pooled.push_back(dist_to_pred(p.row, p.col));
    return percentile(std::move(pooled), 0.95);
}

// ---- skeletonization -------------------------------------------------------

namespace detail {

inline int neighbour_count(const MaskGrid& m, int r, int c) {
    int b = 0;
    for (int k = 0; k < 8; ++k) b += m.at_or(r + kN8r[k], c + kN8c[k], 0) ? 1 : 0;
    return b;
}

inline int transitions(const MaskGrid& m, int r, int c) {
    int a = 0;
    for (int k = 0; k < 8; ++k) {
        const bool cur = m.at_or(r + kN8r[k], c + kN8c[k], 0);
        const bool nxt = m.at_or(r + kN8r[(k + 1) % 8], c + kN8c[(k + 1) % 8], 0);
        a += (!cur && nxt) ? 1 : 0;
    }
    return a;
}

/// True when the skeleton neighbours of (r,c) form a single 8-connected blob
/// inside the 3x3 ring, i.e. the pixel is a redundant corner whose removal
/// cannot disconnect anything.
inline bool ring_single_component(const MaskGrid& m, int r, int c) {
    bool on[8];
    int total = 0;
    for (int k = 0; k < 8; ++k) {
        on[k] = m.at_or(r + kN8r[k], c + kN8c[k], 0) != 0;
        total += on[k];
    }
    if (total == 0) return false;
    int seed = -1;
    for (int k = 0; k < 8; ++k)
        if (on[k]) { seed = k; break; }
    bool seen[8] = {};
    std::vector<int> stack{seed};
    seen[seed] = true;
    int reached = 0;
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        ++reached;
        for (int j = 0; j < 8; ++j) {
            if (!on[j] || seen[j]) continue;
            const int dr = std::abs(kN8r[k] - kN8r[j]);
            const int dc = std::abs(kN8c[k] - kN8c[j]);
            if (dr <= 1 && dc <= 1) {
                seen[j] = true;
                stack.push_back(j);
            }
        }
    }
    return reached == total;
}

}  // namespace detail

/// Classical two-subiteration (Zhang-Suen) thinning to a 1-px, 8-connected
/// skeleton, followed by a redundant-corner sweep that removes staircase
/// pixels the two-subiteration scheme leaves behind.
inline MaskGrid hard_thin(const MaskGrid& mask) {
    MaskGrid s = mask;
    const int R = s.rows(), C = s.cols();
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) s(r, c) = s(r, c) ? 1 : 0;

    std::vector<PixelCoord> kill;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int phase = 0; phase < 2; ++phase) {
            kill.clear();
            for (int r = 0; r < R; ++r) {
                for (int c = 0; c < C; ++c) {
                    if (!s(r, c)) continue;
                    const int b = detail::neighbour_count(s, r, c);
                    if (b < 2 || b > 6) continue;
                    if (detail::transitions(s, r, c) != 1) continue;
                    const bool n = s.at_or(r - 1, c, 0), e = s.at_or(r, c + 1, 0);
                    const bool so = s.at_or(r + 1, c, 0), w = s.at_or(r, c - 1, 0);
                    if (phase == 0) {
                        if ((n && e && so) || (e && so && w)) continue;
                    } else {
                        if ((n && e && w) || (n && so && w)) continue;
                    }
                    kill.push_back({r, c});
                }
            }
            for (const auto& p : kill) s(p.row, p.col) = 0;
            changed |= !kill.empty();
        }
    }

    // Staircase cleanup: peel corners whose ring is one blob. Endpoints
    // (single neighbour) and isolated pixels are kept.
    changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < R; ++r) {
            for (int c = 0; c < C; ++c) {
                if (!s(r, c)) continue;
                if (detail::neighbour_count(s, r, c) < 2) continue;
                if (detail::ring_single_component(s, r, c)) {
                    s(r, c) = 0;
                    changed = true;
                }
            }
        }
    }
    return s;
}

struct SkeletonGraph {
    MaskGrid skeleton;
    std::vector<PixelCoord> pixels;
    std::vector<PixelCoord> junctions;  // cluster centres of >=3-neighbour pixels
    std::vector<PixelCoord> endpoints;  // exactly one neighbour
    Grid<int32_t> component_of;
    int component_count = 0;
};

inline SkeletonGraph hard_skeletonize(const MaskGrid& mask) {
    SkeletonGraph g;
    g.skeleton = hard_thin(mask);
    const int R = g.skeleton.rows(), C = g.skeleton.cols();

    std::vector<PixelCoord> junction_px;
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            if (!g.skeleton(r, c)) continue;
            g.pixels.push_back({r, c});
            const int b = detail::neighbour_count(g.skeleton, r, c);
            if (b >= 3) junction_px.push_back({r, c});
            else if (b == 1) g.endpoints.push_back({r, c});
        }
    }

    // Merge junction pixels within a 2-px radius into one cluster.
    std::vector<bool> used(junction_px.size(), false);
    for (size_t i = 0; i < junction_px.size(); ++i) {
        if (used[i]) continue;
        std::vector<size_t> cluster{i};
        used[i] = true;
        for (size_t qi = 0; qi < cluster.size(); ++qi) {
            for (size_t j = 0; j < junction_px.size(); ++j) {
                if (used[j]) continue;
                if (pixel_distance(junction_px[cluster[qi]], junction_px[j]) <= 2.0) {
                    used[j] = true;
                    cluster.push_back(j);
                }
            }
        }
        double sr = 0, sc = 0;
        for (const size_t j : cluster) {
            sr += junction_px[j].row;
            sc += junction_px[j].col;
        }
        g.junctions.push_back({static_cast<int>(std::lround(sr / cluster.size())),
                               static_cast<int>(std::lround(sc / cluster.size()))});
    }

    auto labels = label_components(g.skeleton);
    g.component_of = std::move(labels.labels);
    g.component_count = labels.count;
    return g;
}

// ---- skeleton-based metrics ------------------------------------------------

/// clDice on hard skeletons: harmonic mean of topological precision
/// (skeleton(pred) inside gt) and sensitivity (skeleton(gt) inside pred).
inline double cl_dice_metric(const MaskGrid& pred, const MaskGrid& gt, double eps = 1e-9) {
    check_same_shape(pred, gt, "cl_dice_metric");
    const MaskGrid sp = hard_thin(pred);
    const MaskGrid sg = hard_thin(gt);
    double sp_in_gt = 0, sp_n = 0, sg_in_pred = 0, sg_n = 0;
    for (int r = 0; r < pred.rows(); ++r)
        for (int c = 0; c < pred.cols(); ++c) {
            if (sp(r, c)) {
                sp_n += 1;
                sp_in_gt += gt(r, c) ? 1 : 0;
            }
            if (sg(r, c)) {
                sg_n += 1;
                sg_in_pred += pred(r, c) ? 1 : 0;
            }
        }
    const double tprec = (sp_in_gt + eps) / (sp_n + eps);
    const double tsens = (sg_in_pred + eps) / (sg_n + eps);
    return 2.0 * tprec * tsens / (tprec + tsens);
}

inline std::vector<PixelCoord> nonzero_pixels(const MaskGrid& m) {
    std::vector<PixelCoord> out;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (m(r, c)) out.push_back({r, c});
    return out;
}

/// Centerline F1: a skeleton pixel counts as matched when it lies within
/// `tol` (Euclidean) of the other mask's skeleton.
inline double skeleton_f1(const MaskGrid& pred, const MaskGrid& gt, double tol = 2.0) {
    check_same_shape(pred, gt, "skeleton_f1");
    const MaskGrid sp = hard_thin(pred);
    const MaskGrid sg = hard_thin(gt);
    const auto ps = nonzero_pixels(sp);
    const auto gs = nonzero_pixels(sg);
    if (ps.empty() && gs.empty()) return 1.0;
    double prec = 1.0, rec = 1.0;
    if (!ps.empty()) {
        const auto d = distance_transform(sg);
        double hit = 0;
        for (const auto& p : ps) hit += d(p.row, p.col) <= tol ? 1 : 0;
        prec = hit / static_cast<double>(ps.size());
    }
    if (!gs.empty()) {
        const auto d = distance_transform(sp);
        double hit = 0;
        for (const auto& p : gs) hit += d(p.row, p.col) <= tol ? 1 : 0;
        rec = hit / static_cast<double>(gs.size());
    }
    return (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
}

struct JunctionScore {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

/// Greedy nearest-first one-to-one matching of junction clusters within `tol`.
inline JunctionScore junction_metrics(const MaskGrid& pred, const MaskGrid& gt,
                                      double tol = 3.0) {
    check_same_shape(pred, gt, "junction_metrics");
    const auto jp = hard_skeletonize(pred).junctions;
    const auto jg = hard_skeletonize(gt).junctions;

    struct Pair {
        double d;
        size_t i, j;
    };
    std::vector<Pair> pairs;
    for (size_t i = 0; i < jp.size(); ++i)
        for (size_t j = 0; j < jg.size(); ++j) {
            const double d = pixel_distance(jp[i], jg[j]);
            if (d <= tol) pairs.push_back({d, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
    });
    std::vector<bool> pu(jp.size(), false), gu(jg.size(), false);
    int matches = 0;
    for (const auto& pr : pairs) {
        if (pu[pr.i] || gu[pr.j]) continue;
        pu[pr.i] = gu[pr.j] = true;
        ++matches;
    }
    JunctionScore s;
    s.precision = jp.empty() ? 1.0 : static_cast<double>(matches) / jp.size();
    s.recall = jg.empty() ? 1.0 : static_cast<double>(matches) / jg.size();
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

// ---- per-sample reports ----------------------------------------------------

struct ScopeMetrics {
    double dice = 0, iou = 0, hd95 = 0, cldice = 0;
    double betti0_err = 0, skeleton_f1 = 0;
    double junction_precision = 0, junction_recall = 0, junction_f1 = 0;
    double pred_components = 0, gt_components = 0;
};

struct MetricsReport {
    std::string id;
    ScopeMetrics artery, vein, combined;
};

struct EvalOptions {
    double threshold = 0.5;
    double junction_tol = 3.0;
    double skeleton_tol = 2.0;
};

inline ScopeMetrics evaluate_masks(const MaskGrid& pred, const MaskGrid& gt,
                                   const EvalOptions& opt = {}) {
    ScopeMetrics m;
    std::tie(m.dice, m.iou) = dice_iou(pred, gt);
    m.hd95 = hd95(pred, gt);
    m.cldice = cl_dice_metric(pred, gt);
    m.betti0_err = betti0_error(pred, gt);
    m.skeleton_f1 = skeleton_f1(pred, gt, opt.skeleton_tol);
    const auto js = junction_metrics(pred, gt, opt.junction_tol);
    m.junction_precision = js.precision;
    m.junction_recall = js.recall;
    m.junction_f1 = js.f1;
    m.pred_components = component_count(pred);
    m.gt_components = component_count(gt);
    return m;
}

inline MaskGrid mask_union(const MaskGrid& a, const MaskGrid& b) {
    check_same_shape(a, b, "mask_union");
    MaskGrid u(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) u(r, c) = (a(r, c) || b(r, c)) ? 1 : 0;
    return u;
}

inline MaskGrid mask_exclude(const MaskGrid& m, const MaskGrid& ignore) {
    MaskGrid out = m;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (ignore.inside(r, c) && ignore(r, c)) out(r, c) = 0;
    return out;
}

/// Artery / vein scopes per class plus a combined scope on the pixelwise
/// union of the two channels. Uncertain pixels are dropped from both
/// prediction and ground truth before anything is measured.
inline MetricsReport evaluate_sample(const torch::Tensor& pred_probs,
                                     const MaskGrid& artery_gt, const MaskGrid& vein_gt,
                                     const MaskGrid& uncertain, const EvalOptions& opt = {}) {
    TORCH_CHECK(pred_probs.dim() == 3 && pred_probs.size(0) == 2,
                "evaluate_sample expects [2,H,W] probabilities");
    MaskGrid pa = binarize(pred_probs[0], opt.threshold);
    MaskGrid pv = binarize(pred_probs[1], opt.threshold);
    check_same_shape(pa, artery_gt, "evaluate_sample");

    MaskGrid ga = artery_gt, gv = vein_gt;
    if (!uncertain.empty()) {
        pa = mask_exclude(pa, uncertain);
        pv = mask_exclude(pv, uncertain);
        ga = mask_exclude(ga, uncertain);
        gv = mask_exclude(gv, uncertain);
    }

    MetricsReport rep;
    rep.artery = evaluate_masks(pa, ga, opt);
    rep.vein = evaluate_masks(pv, gv, opt);
    rep.combined = evaluate_masks(mask_union(pa, pv), mask_union(ga, gv), opt);
    return rep;
}

inline MetricsReport aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: empty report list");
    MetricsReport mean;
    mean.id = "aggregate";
    auto add = [](ScopeMetrics& acc, const ScopeMetrics& x) {
        acc.dice += x.dice;
        acc.iou += x.iou;
        acc.hd95 += x.hd95;
        acc.cldice += x.cldice;
        acc.betti0_err += x.betti0_err;
        acc.skeleton_f1 += x.skeleton_f1;
        acc.junction_precision += x.junction_precision;
        acc.junction_recall += x.junction_recall;
        acc.junction_f1 += x.junction_f1;
        acc.pred_components += x.pred_components;
        acc.gt_components += x.gt_components;
    };
    auto div = [](ScopeMetrics& acc, double n) {
        acc.dice /= n;
        acc.iou /= n;
        acc.hd95 /= n;
        acc.cldice /= n;
        acc.betti0_err /= n;
        acc.skeleton_f1 /= n;
        acc.junction_precision /= n;
        acc.junction_recall /= n;
        acc.junction_f1 /= n;
        acc.pred_components /= n;
        acc.gt_components /= n;
    };
    for (const auto& r : reports) {
        add(mean.artery, r.artery);
        add(mean.vein, r.vein);
        add(mean.combined, r.combined);
    }
    const double n = static_cast<double>(reports.size());
    div(mean.artery, n);
    div(mean.vein, n);
    div(mean.combined, n);
    return mean;
}

// ---- serialization ---------------------------------------------------------

inline nlohmann::json scope_to_json(const ScopeMetrics& m) {
    return {{"dice", m.dice},
            {"iou", m.iou},
            {"hd95", m.hd95},
            {"cldice", m.cldice},
            {"betti0_err", m.betti0_err},
            {"skeleton_f1", m.skeleton_f1},
            {"junction_precision", m.junction_precision},
            {"junction_recall", m.junction_recall},
            {"junction_f1", m.junction_f1},
            {"pred_components", m.pred_components},
            {"gt_components", m.gt_components}};
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
    return {{"id", r.id},
            {"artery", scope_to_json(r.artery)},
            {"vein", scope_to_json(r.vein)},
            {"combined", scope_to_json(r.combined)}};
}

inline std::string metrics_csv_header() {
    static const char* fields[] = {"dice",        "iou",          "hd95",
                                   "cldice",      "betti0_err",   "skeleton_f1",
                                   "junction_precision", "junction_recall", "junction_f1",
                                   "pred_components",    "gt_components"};
    std::ostringstream os;
    os << "id";
    for (const char* scope : {"artery", "vein", "combined"})
        for (const char* f : fields) os << ',' << scope << '_' << f;
    return os.str();
}

inline std::string metrics_csv_row(const MetricsReport& r) {
    std::ostringstream os;
    os << r.id;
    for (const ScopeMetrics* m : {&r.artery, &r.vein, &r.combined}) {
        os << ',' << m->dice << ',' << m->iou << ',' << m->hd95 << ',' << m->cldice << ','
           << m->betti0_err << ',' << m->skeleton_f1 << ',' << m->junction_precision << ','
           << m->junction_recall << ',' << m->junction_f1 << ',' << m->pred_components << ','
           << m->gt_components;
    }
    return os.str();
}

}  // namespace vesseltopo
