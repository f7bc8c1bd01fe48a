#ifndef ISOQ_ISOQ_HPP
#define ISOQ_ISOQ_HPP

#include "isoq/arith.hpp"
#include "isoq/smith.hpp"
#include "isoq/classgroup.hpp"
#include "isoq/relations.hpp"
#include "isoq/field_poly.hpp"
#include "isoq/curves.hpp"
#include "isoq/sieve.hpp"
#include "isoq/attack.hpp"
#include "isoq/instance_file.hpp"

#endif
