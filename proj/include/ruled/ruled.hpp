#ifndef RULED_RULED_HPP
#define RULED_RULED_HPP

#include "ruled/error.hpp"
#include "ruled/format.hpp"
#include "ruled/expression.hpp"
#include "ruled/spline.hpp"
#include "ruled/profile.hpp"
#include "ruled/frame.hpp"
#include "ruled/surface.hpp"
#include "ruled/families.hpp"
#include "ruled/classification.hpp"

#endif // RULED_RULED_HPP
