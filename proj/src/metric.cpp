#include "amalgam/metric.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> pts,
                                     std::vector<std::vector<Rational>> d)
    : points(std::move(pts)), dist(std::move(d))
{
    require(!points.empty(), "metric spaces must be nonempty");
    require(std::set<std::string>(points.begin(), points.end()).size() ==
                points.size(),
            "point labels must be distinct");
    require(dist.size() == points.size(), "distance matrix size mismatch");
    const int n = size();
    for (int i = 0; i < n; ++i) {
        require(static_cast<int>(dist[i].size()) == n,
                "distance matrix must be square");
        require(dist[i][i] == Rational(0), "d(x,x) must be 0");
        for (int j = 0; j < n; ++j) {
            if (i != j)
                require(dist[i][j] > Rational(0),
                        "distinct points need positive distance");
            require(dist[i][j] == dist[j][i], "distances must be symmetric");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                require(dist[i][j] <= dist[i][k] + dist[k][j],
                        "triangle inequality violated at " + points[i] + "," +
                            points[j] + "," + points[k]);
}

int FiniteMetricSpace::index_of(const std::string& label) const
{
    for (int i = 0; i < size(); ++i)
        if (points[i] == label) return i;
    return -1;
}

Rational FiniteMetricSpace::diameter() const
{
    Rational d(0);
    for (const auto& row : dist)
        for (const Rational& x : row)
            if (x > d) d = x;
    return d;
}

int PartialIsometry::image_of(int point) const
{
    for (const auto& [x, y] : pairs)
        if (x == point) return y;
    return -1;
}

bool is_partial_isometry(const FiniteMetricSpace& space,
                         const PartialIsometry& iso, std::string* why)
{
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    std::set<int> dom, ran;
    for (const auto& [x, y] : iso.pairs) {
        if (x < 0 || x >= space.size() || y < 0 || y >= space.size())
            return fail("point index out of range");
        if (!dom.insert(x).second) return fail("domain point repeated");
        if (!ran.insert(y).second) return fail("range point repeated");
    }
    for (const auto& [x1, y1] : iso.pairs)
        for (const auto& [x2, y2] : iso.pairs)
            if (space.dist[x1][x2] != space.dist[y1][y2])
                return fail("distance not preserved between " +
                            space.points[x1] + " and " + space.points[x2]);
    return true;
}

MetricSystem::MetricSystem(FiniteMetricSpace sp, std::vector<PartialIsometry> is)
    : space(std::move(sp)), isos(std::move(is))
{
    std::string why;
    for (const PartialIsometry& p : isos)
        require(is_partial_isometry(space, p, &why),
                "system map is not a partial isometry: " + why);
}

MetricJointEmbedding jep_metric_systems(const MetricSystem& s,
                                        const MetricSystem& t)
{
    require(s.arity() == t.arity(),
            "joint embedding needs systems of equal arity");
    const int ns = s.space.size();
    const int nt = t.space.size();
    const Rational k = s.space.diameter() + t.space.diameter() + Rational(1);

    std::vector<std::string> pts;
    for (const std::string& p : s.space.points) pts.push_back("s." + p);
    for (const std::string& p : t.space.points) pts.push_back("t." + p);
    std::vector<std::vector<Rational>> d(
        pts.size(), std::vector<Rational>(pts.size(), k));
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) d[i][j] = s.space.dist[i][j];
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nt; ++j) d[ns + i][ns + j] = t.space.dist[i][j];

    MetricJointEmbedding out;
    std::vector<PartialIsometry> isos;
    for (int i = 0; i < s.arity(); ++i) {
        PartialIsometry chi;
        for (const auto& [x, y] : s.isos[i].pairs) chi.pairs.push_back({x, y});
        for (const auto& [x, y] : t.isos[i].pairs)
            chi.pairs.push_back({ns + x, ns + y});
        isos.push_back(std::move(chi));
    }
    out.system =
        MetricSystem(FiniteMetricSpace(std::move(pts), std::move(d)),
                     std::move(isos));
    for (int i = 0; i < ns; ++i) out.left.push_back(i);
    for (int i = 0; i < nt; ++i) out.right.push_back(ns + i);
    return out;
}

FiniteMetricSpace amalgamate_metric(const FiniteMetricSpace& b,
                                    const FiniteMetricSpace& c)
{
    // Shared points by label; the restrictions must agree.
    std::vector<std::pair<int, int>> shared; // (index in b, index in c)
    for (int i = 0; i < b.size(); ++i) {
        int j = c.index_of(b.points[i]);
        if (j >= 0) shared.push_back({i, j});
    }
    require(!shared.empty(), "amalgamation needs a shared point set");
    for (const auto& [i1, j1] : shared)
        for (const auto& [i2, j2] : shared)
            require(b.dist[i1][i2] == c.dist[j1][j2],
                    "B and C disagree on the shared points");

    std::vector<std::string> pts = b.points;
    std::vector<int> c_index; // amalgam index of each C point
    c_index.resize(static_cast<size_t>(c.size()), -1);
    for (const auto& [i, j] : shared) c_index[static_cast<size_t>(j)] = i;
    for (int j = 0; j < c.size(); ++j)
        if (c_index[static_cast<size_t>(j)] < 0) {
            c_index[static_cast<size_t>(j)] = static_cast<int>(pts.size());
            pts.push_back(c.points[j]);
        }

    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n,
                                                                  Rational(0)));
    for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j) d[i][j] = b.dist[i][j];
    for (int i = 0; i < c.size(); ++i)
        for (int j = 0; j < c.size(); ++j)
            d[c_index[static_cast<size_t>(i)]][c_index[static_cast<size_t>(j)]] =
                c.dist[i][j];
    // Cross distances: minimum path through a shared point.
    for (int x = 0; x < b.size(); ++x) {
        if (c.index_of(b.points[x]) >= 0) continue;
        for (int j = 0; j < c.size(); ++j) {
            if (c_index[static_cast<size_t>(j)] < b.size()) continue;
            Rational best;
            bool first = true;
            for (const auto& [zi, zj] : shared) {
                Rational via = b.dist[x][zi] + c.dist[zj][j];
                if (first || via < best) best = via;
                first = false;
            }
            d[x][c_index[static_cast<size_t>(j)]] = best;
            d[c_index[static_cast<size_t>(j)]][x] = best;
        }
    }
    // The constructor re-certifies the triangle inequality exhaustively.
    return FiniteMetricSpace(std::move(pts), std::move(d));
}

UnionIsometry union_isometry(const FiniteMetricSpace& b,
                             const FiniteMetricSpace& c,
                             const PartialIsometry& phi,
                             const PartialIsometry& chi)
{
    std::string why;
    require(is_partial_isometry(b, phi, &why),
            "phi is not a partial isometry of B: " + why);
    require(is_partial_isometry(c, chi, &why),
            "chi is not a partial isometry of C: " + why);

    UnionIsometry out;
    out.amalgam = amalgamate_metric(b, c);
    std::map<int, int> theta; // amalgam index -> amalgam index
    auto add = [&](int x, int y, const std::string& side) {
        auto [it, fresh] = theta.insert({x, y});
        require(fresh || it->second == y,
                "phi and chi disagree on shared point " +
                    out.amalgam.points[static_cast<size_t>(x)] + " (" + side +
                    ")");
    };
    for (const auto& [x, y] : phi.pairs)
        add(out.amalgam.index_of(b.points[static_cast<size_t>(x)]),
            out.amalgam.index_of(b.points[static_cast<size_t>(y)]), "phi");
    for (const auto& [x, y] : chi.pairs)
        add(out.amalgam.index_of(c.points[static_cast<size_t>(x)]),
            out.amalgam.index_of(c.points[static_cast<size_t>(y)]), "chi");
    for (const auto& [x, y] : theta) out.theta.pairs.push_back({x, y});
    require(is_partial_isometry(out.amalgam, out.theta, &why),
            "phi cup chi is not an isometry of the amalgam: " + why);
    return out;
}

} // namespace amalgam
