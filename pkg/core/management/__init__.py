# Management commands package 