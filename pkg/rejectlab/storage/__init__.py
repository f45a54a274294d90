"""File persistence for tasks, rejector records, CSV tables and reports"""
