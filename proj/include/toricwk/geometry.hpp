#pragma once

#include "toricwk/rational.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toricwk {

// {x : <normal, x> + offset >= 0} with a primitive integer normal.
struct HalfSpace {
    IntVec normal;
    Rational offset;

    HalfSpace() = default;
    HalfSpace(IntVec normal, Rational offset);

    // Positive rescaling of <b,x> + c >= 0 to primitive integer form.
    static HalfSpace from_form(const RatVec& b, const Rational& c);

    Rational value(const RatVec& x) const;
    double value(std::span<const double> x) const;
    bool operator==(const HalfSpace&) const = default;
};

class Polyhedron {
public:
    Polyhedron() = default;
    Polyhedron(int dim, std::vector<HalfSpace> halfspaces);

    int dim() const { return dim_; }
    const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
    // All offsets strictly positive, i.e. the origin is an interior point.
    bool origin_interior() const;
    bool contains(const RatVec& x) const;
    bool contains(std::span<const double> x, double slack = 0.0) const;
    bool operator==(const Polyhedron&) const = default;

private:
    int dim_ = 0;
    std::vector<HalfSpace> halfspaces_;
};

struct Cone {
    int dim = 0;
    std::vector<IntVec> normals;
    // Primitive generators: a canonical basis of the lineality space with both
    // signs, followed by the extreme rays of the pointed part. Sorted.
    std::vector<IntVec> generators;

    static Cone from_normals(int dim, std::vector<IntVec> normals);
    bool is_zero() const { return generators.empty(); }
    bool is_pointed() const;
    bool contains(const RatVec& x) const;
};

struct ValidationReport {
    RatVec witness;
    std::vector<int> irredundant;  // indices of facet-defining half-spaces
    bool bounded = false;
    Polyhedron reduced;            // the polyhedron restricted to `irredundant`
};

struct VertexCertificate {
    RatVec vertex;
    std::vector<IntVec> edges;  // primitive edge directions
    Rational det;
};

struct DelzantReport {
    bool delzant = true;
    std::vector<VertexCertificate> vertices;
};

struct Facet {
    int parent_index = -1;
    RatVec origin;                 // point on the hyperplane
    std::vector<IntVec> basis;     // n-1 lattice directions spanning the hyperplane
    Rational measure_scale;        // dσ = measure_scale * dt in facet coordinates
    Polyhedron domain;             // facet as a polyhedron in R^{n-1}

    RatVec to_ambient(const RatVec& t) const;
    void to_ambient(const double* t, double* x) const;
};

struct ProductDecomposition {
    bool product = false;
    std::string reason;
    std::vector<int> i1, i2, i3;
    Cone recession;
    int pv_dim = 0;
    std::vector<RatVec> pv_vertices;  // P_V placed at the translation point
    RatVec translation;
    std::optional<Polyhedron> product_polyhedron;
    double compact_radius = 0.0;      // outside this ball P equals the product
};

// Interior witness by linear programming; nullopt when the interior is empty.
std::optional<RatVec> interior_point(const Polyhedron& p);
bool has_interior(const Polyhedron& p);

ValidationReport validate(const Polyhedron& p);
std::vector<RatVec> vertices(const Polyhedron& p);
DelzantReport is_delzant(const Polyhedron& p);
Cone recession_cone(const Polyhedron& p);
Cone dual_cone(const Cone& c);
Polyhedron interior_polyhedron(const Polyhedron& p, double delta);
// Sum of primitive generators of the dual of the recession cone.
RatVec auto_direction(const Polyhedron& p);
Polyhedron truncate(const Polyhedron& p, const std::optional<RatVec>& b_plus, const Rational& delta_star);
bool is_anticanonical(const Polyhedron& p);
ProductDecomposition product_cylindrical_check(const Polyhedron& p);
std::vector<Facet> facet_atlas(const Polyhedron& p);

// Section of {<b,x> + c = 0} by the given half-spaces (entry `skip` ignored).
// Returns nullopt when the section has no relative interior. The measure is
// normalized so that dσ ∧ d(<b,x>+c) = dx.
std::optional<Facet> hyperplane_section(const RatVec& b, const Rational& c,
                                        const std::vector<HalfSpace>& constraints, int skip);

// min over P of <b,x> + c; nullopt when unbounded below (P assumed nonempty).
std::optional<Rational> minimize_affine(const Polyhedron& p, const RatVec& b, const Rational& c,
                                        RatVec* argmin = nullptr);

Polyhedron translate(const Polyhedron& p, const RatVec& t);
Polyhedron apply_unimodular(const Polyhedron& p, const std::vector<IntVec>& u);

}  // namespace toricwk
